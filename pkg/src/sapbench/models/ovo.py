"""One-vs-one reduction shared by the LR and SVM families.

Three binary machines are fitted, one per class pair in label order:
(L, M), (L, H), (M, H).  Decision values are oriented so that a positive
value favors the first class of the pair.  Prediction is by majority vote;
a pair whose decision value is exactly zero contributes half a vote to each
side.  Vote ties are broken by the summed signed decision value toward each
class, then by label order L < M < H.
"""

from __future__ import annotations

import numpy as np

#: Class-index pairs (first class is the binary positive).
PAIRS = ((0, 1), (0, 2), (1, 2))


def pair_votes(decisions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Votes (n, 3) and signed tie-break scores (n, 3) from decision values.

    ``decisions`` is (n, 3): one column per pair in PAIRS order.
    """
    n = decisions.shape[0]
    votes = np.zeros((n, 3))
    scores = np.zeros((n, 3))
    for col, (a, b) in enumerate(PAIRS):
        d = decisions[:, col]
        votes[:, a] += np.where(d > 0, 1.0, np.where(d < 0, 0.0, 0.5))
        votes[:, b] += np.where(d < 0, 1.0, np.where(d > 0, 0.0, 0.5))
        scores[:, a] += d
        scores[:, b] -= d
    return votes, scores


def vote_predict_indices(decisions: np.ndarray) -> np.ndarray:
    """Predicted class indices under the vote-with-tiebreak rule.

    The 0.4-scaled sigmoid keeps the tie-break term strictly below the
    minimum half-vote gap, so it can only ever separate exact vote ties.
    """
    votes, scores = pair_votes(decisions)
    tiebreak = 0.4 / (1.0 + np.exp(-scores))
    return np.argmax(votes + tiebreak, axis=1)


def vote_proba(decisions: np.ndarray, tiebreak_weight: float = 1e-6) -> np.ndarray:
    """Vote-fraction probability surrogate whose argmax matches vote_predict.

    Rows are (votes + w * softmax(tiebreak)) normalized; with all decision
    values zero every pair splits its vote and the row is exactly uniform.
    """
    votes, scores = pair_votes(decisions)
    shifted = scores - scores.max(axis=1, keepdims=True)
    soft = np.exp(shifted)
    soft /= soft.sum(axis=1, keepdims=True)
    raw = votes + tiebreak_weight * soft
    return raw / raw.sum(axis=1, keepdims=True)

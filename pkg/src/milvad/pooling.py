"""Top-k mean pooling of segment scores and logit-space binary cross-entropy.

The video logit is the mean of the k largest segment scores; k=1 recovers
max pooling and k=N mean pooling. Ties break toward lower indices, so the
selected index set is a deterministic function of the scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PoolResult:
    """Pooled logit, the selected segment indices (ascending), and sigmoid(logit)."""

    video_logit: float
    selected_indices: tuple[int, ...]
    probability: float


def topk_pool(scores: np.ndarray, k: int) -> PoolResult:
    """Mean of the k largest scores, ties broken toward lower indices.

    The mean is an exactly rounded sum (math.fsum) divided by k, so it does
    not depend on the order the selected scores are visited in.
    """
    s = _as_scores(scores)
    selected = _top_indices(s, k)
    chosen = s[selected]
    logit = math.fsum(chosen) / k
    # The division is one extra rounding and can land an ulp outside the
    # selected range (e.g. three equal scores); clamping keeps the invariant
    # min(scores) <= logit <= max(scores) unconditionally true.
    logit = min(max(logit, float(chosen.min())), float(chosen.max()))
    return PoolResult(
        video_logit=logit,
        selected_indices=tuple(int(i) for i in selected),
        probability=_sigmoid(logit),
    )


def pool_backward(scores: np.ndarray, k: int) -> np.ndarray:
    """Gradient of the pooled logit w.r.t. each score: 1/k on selected, else 0."""
    s = _as_scores(scores)
    grad = np.zeros(s.shape[0], dtype=np.float64)
    grad[_top_indices(s, k)] = 1.0 / k
    return grad


def bce_from_logit(logit: float, label: int) -> tuple[float, float]:
    """Binary cross-entropy of sigmoid(logit) against a 0/1 label, plus d/dlogit.

    Uses the overflow-safe form ``max(z, 0) - y*z + log1p(exp(-|z|))``; the
    gradient is ``sigmoid(z) - y``. Stays finite for any finite logit.
    """
    z = float(logit)
    if not math.isfinite(z):
        raise ValueError(f"logit must be finite, got {z}")
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    loss = max(z, 0.0) - label * z + math.log1p(math.exp(-abs(z)))
    grad = _sigmoid(z) - label
    return loss, grad


def _as_scores(scores: np.ndarray) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError(f"scores must be 1-d, got {s.ndim}-d")
    if s.shape[0] < 1:
        raise ValueError("scores must be non-empty")
    if not np.isfinite(s).all():
        raise ValueError("scores contain non-finite values")
    return s


def _top_indices(s: np.ndarray, k: int) -> np.ndarray:
    n = s.shape[0]
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ValueError(f"k must be an integer, got {type(k).__name__}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    # lexsort's last key is primary: descending score, then ascending index.
    order = np.lexsort((np.arange(n), -s))
    return np.sort(order[:k])


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)

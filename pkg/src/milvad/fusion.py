"""Per-backbone L2 normalization and concatenation into fused features.

Each backbone's segment vector is normalized to unit length independently,
then the two are concatenated. Normalization happens in float64 regardless
of the stored precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bagfile import SegmentFeatureBag

# Norms at or below this are treated as zero; the vector passes through.
EPS = 1e-12


def l2_normalize(vector: np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm; zero-norm vectors pass through unchanged."""
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got {v.ndim}-d")
    return _normalize_rows(v[np.newaxis, :])[0]


@dataclass
class FusedBag:
    """One video's fused float64 feature matrix plus its label."""

    video_id: str
    label: int
    features: np.ndarray

    @property
    def num_segments(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


def fuse_bag(bag: SegmentFeatureBag) -> FusedBag:
    """Row-normalize each backbone's matrix and concatenate along columns.

    Row ``i`` of the result equals ``l2_normalize(i3d row i)`` followed by
    ``l2_normalize(tsf row i)``.
    """
    fused = np.concatenate(
        [_normalize_rows(bag.i3d_features), _normalize_rows(bag.tsf_features)], axis=1
    )
    return FusedBag(video_id=bag.video_id, label=bag.label, features=fused)


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    if not np.isfinite(m).all():
        raise ValueError("cannot normalize non-finite values")
    norms = np.sqrt(np.einsum("ij,ij->i", m, m))
    scale = np.where(norms > EPS, norms, 1.0)
    return m / scale[:, None]

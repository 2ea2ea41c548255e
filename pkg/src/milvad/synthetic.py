"""Seeded synthetic datasets with planted anomalies, plus reference oracles.

Normal videos are pure spherical Gaussian noise per backbone. Anomalous
videos get a few planted segments shifted along one fixed direction drawn
from the dataset seed, so an informed observer can separate the classes
while an uninformed one sees noise. The signal direction is itself a
standard normal draw over the fused width; with the default shift of 1.5
the planted segments sit far from the noise cloud along that axis, which
keeps the separation task easy at desk scale without making any single
coordinate a giveaway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bagfile import SegmentFeatureBag
from .errors import NumericError
from .evaluation import roc_auc
from .fusion import FusedBag
from .head import HeadParameters, coordinate_count, head_forward, perturb_coordinate
from .pooling import bce_from_logit, topk_pool
from .training import MAX_SEED

# video_id -> ascending planted segment indices, for anomalous videos only.
GroundTruthMask = dict[str, tuple[int, ...]]


@dataclass(frozen=True)
class SynthConfig:
    """Shape and signal parameters of one synthetic dataset."""

    seed: int = 42
    num_normal: int = 100
    num_anomalous: int = 100
    num_segments: int = 32
    i3d_dim: int = 24
    tsf_dim: int = 40
    anomalous_segments_per_video: int = 3
    signal_shift: float = 1.5

    def __post_init__(self):
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError(f"seed must be in [0, 2**64), got {self.seed}")
        if self.num_normal < 0 or self.num_anomalous < 0:
            raise ValueError("video counts must be >= 0")
        if self.num_normal + self.num_anomalous < 1:
            raise ValueError("dataset must contain at least one video")
        if self.num_segments < 1:
            raise ValueError(f"num_segments must be >= 1, got {self.num_segments}")
        if self.i3d_dim < 1 or self.tsf_dim < 1:
            raise ValueError("feature dims must be >= 1")
        if not 1 <= self.anomalous_segments_per_video <= self.num_segments:
            raise ValueError(
                "anomalous_segments_per_video must be in "
                f"[1, {self.num_segments}], got {self.anomalous_segments_per_video}"
            )
        if not (math.isfinite(self.signal_shift) and self.signal_shift >= 0):
            raise ValueError(f"signal_shift must be a finite value >= 0, got {self.signal_shift}")

    @property
    def fused_dim(self) -> int:
        return self.i3d_dim + self.tsf_dim


def generate(config: SynthConfig) -> tuple[list[SegmentFeatureBag], GroundTruthMask]:
    """Deterministically generate bags and the planted-segment mask.

    Draw order is fixed: the signal direction first, then per-video noise
    (normals first), then per-anomalous-video noise and planted indices. The
    output is a pure function of the config.
    """
    rng = np.random.default_rng(config.seed)
    direction = rng.standard_normal(config.fused_dim)
    bags: list[SegmentFeatureBag] = []
    masks: GroundTruthMask = {}
    for i in range(config.num_normal):
        noise = rng.standard_normal((config.num_segments, config.fused_dim))
        bags.append(_split_bag(f"normal_{i:04d}", 0, noise, config))
    for i in range(config.num_anomalous):
        video_id = f"anomalous_{i:04d}"
        noise = rng.standard_normal((config.num_segments, config.fused_dim))
        planted = np.sort(
            rng.choice(config.num_segments, size=config.anomalous_segments_per_video, replace=False)
        )
        noise[planted] += config.signal_shift * direction
        masks[video_id] = tuple(int(p) for p in planted)
        bags.append(_split_bag(video_id, 1, noise, config))
    return bags, masks


def partition(
    bags: list[SegmentFeatureBag],
    masks: GroundTruthMask,
    first_normal: int,
    first_anomalous: int,
) -> tuple[list[SegmentFeatureBag], GroundTruthMask, list[SegmentFeatureBag], GroundTruthMask]:
    """Split a generated dataset into two label-balanced parts.

    The first ``first_normal`` normal and ``first_anomalous`` anomalous
    videos (in generation order) form the first part; the rest form the
    second. Both parts inherit the same planted direction by construction.
    """
    normals = [bag for bag in bags if bag.label == 0]
    anomalous = [bag for bag in bags if bag.label == 1]
    if not 0 <= first_normal <= len(normals):
        raise ValueError(f"first_normal must be in [0, {len(normals)}], got {first_normal}")
    if not 0 <= first_anomalous <= len(anomalous):
        raise ValueError(f"first_anomalous must be in [0, {len(anomalous)}], got {first_anomalous}")
    head = normals[:first_normal] + anomalous[:first_anomalous]
    tail = normals[first_normal:] + anomalous[first_anomalous:]
    head_masks = {b.video_id: masks[b.video_id] for b in head if b.label == 1}
    tail_masks = {b.video_id: masks[b.video_id] for b in tail if b.label == 1}
    return head, head_masks, tail, tail_masks


def oracle_auc(bags: list[SegmentFeatureBag], masks: GroundTruthMask, config: SynthConfig) -> float:
    """AUC of an informed scorer that knows the true signal direction.

    Each video is scored by the top-k mean of its raw fused segments
    projected onto the unit planted direction, with k equal to the planted
    segment count. This ceiling is what a perfect detector could reach.
    """
    _check_masks(bags, masks, config)
    direction = np.random.default_rng(config.seed).standard_normal(config.fused_dim)
    direction /= np.linalg.norm(direction)
    scores = []
    labels = []
    for bag in bags:
        fused = np.concatenate(
            [bag.i3d_features.astype(np.float64), bag.tsf_features.astype(np.float64)], axis=1
        )
        projected = fused @ direction
        scores.append(topk_pool(projected, config.anomalous_segments_per_video).video_logit)
        labels.append(bag.label)
    return roc_auc(np.array(scores), np.array(labels))


def finite_diff_loss(
    params: HeadParameters,
    bag: FusedBag,
    k: int,
    label: int,
    coordinate: int,
    step: float = 1e-5,
) -> float:
    """Central finite difference of the pooled BCE loss along one coordinate.

    Independent of the analytic backward pass: it only reruns the forward
    path at ``theta +- step`` and differences the losses.
    """
    if not (math.isfinite(step) and step > 0):
        raise ValueError(f"step must be > 0, got {step}")
    if not 0 <= coordinate < coordinate_count(params):
        raise ValueError(f"coordinate {coordinate} out of range")
    loss_plus = _forward_loss(perturb_coordinate(params, coordinate, +step), bag, k, label)
    loss_minus = _forward_loss(perturb_coordinate(params, coordinate, -step), bag, k, label)
    return (loss_plus - loss_minus) / (2.0 * step)


def _forward_loss(params: HeadParameters, bag: FusedBag, k: int, label: int) -> float:
    scores, _ = head_forward(bag.features, params)
    if not np.isfinite(scores).all():
        raise NumericError(f"non-finite segment score for video '{bag.video_id}'")
    loss, _ = bce_from_logit(topk_pool(scores, k).video_logit, label)
    return loss


def _split_bag(video_id: str, label: int, fused: np.ndarray, config: SynthConfig) -> SegmentFeatureBag:
    return SegmentFeatureBag(
        video_id=video_id,
        label=label,
        i3d_features=fused[:, : config.i3d_dim],
        tsf_features=fused[:, config.i3d_dim :],
    )


def _check_masks(bags: list[SegmentFeatureBag], masks: GroundTruthMask, config: SynthConfig) -> None:
    seen = set()
    for bag in bags:
        if bag.label == 0:
            if bag.video_id in masks:
                raise ValueError(f"normal video '{bag.video_id}' has a planted mask")
            continue
        seen.add(bag.video_id)
        planted = masks.get(bag.video_id)
        if planted is None:
            raise ValueError(f"anomalous video '{bag.video_id}' is missing from the mask")
        if len(planted) != config.anomalous_segments_per_video:
            raise ValueError(
                f"mask for '{bag.video_id}' has {len(planted)} entries, "
                f"expected {config.anomalous_segments_per_video}"
            )
        if len(set(planted)) != len(planted) or any(
            not 0 <= p < config.num_segments for p in planted
        ):
            raise ValueError(f"mask for '{bag.video_id}' has invalid segment indices")
    extra = set(masks) - seen
    if extra:
        raise ValueError(f"mask names unknown videos: {sorted(extra)}")

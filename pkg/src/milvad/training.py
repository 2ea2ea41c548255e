"""Mini-batch training of the scoring head under video-level supervision.

Each step scores every segment of a balanced batch of videos, pools the top
k scores per video into one logit, applies binary cross-entropy against the
video label, and takes an adaptive-moment gradient step. Only video-level
labels are consumed; segment scores are shaped indirectly through pooling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericError
from .evaluation import roc_auc
from .fusion import FusedBag
from .head import (
    DEFAULT_HIDDEN_SIZES,
    DEFAULT_LEAKY_SLOPE,
    HeadParameters,
    head_backward,
    head_forward,
    init_head_parameters,
)
from .pooling import bce_from_logit, topk_pool

MAX_SEED = 2**64


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters for one training run."""

    k: int = 3
    epochs: int = 50
    batch_pairs: int = 8
    learning_rate: float = 1e-3
    moment_decay_1: float = 0.9
    moment_decay_2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 42
    hidden_sizes: tuple[int, int, int] = DEFAULT_HIDDEN_SIZES
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_pairs < 1:
            raise ValueError(f"batch_pairs must be >= 1, got {self.batch_pairs}")
        # Zero is allowed so a no-op run can serve as a determinism probe.
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        for name, beta in (
            ("moment_decay_1", self.moment_decay_1),
            ("moment_decay_2", self.moment_decay_2),
        ):
            if not 0 < beta < 1:
                raise ValueError(f"{name} must be in (0, 1), got {beta}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError(f"seed must be in [0, 2**64), got {self.seed}")
        if len(self.hidden_sizes) != 3 or any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden_sizes must be 3 positive ints, got {self.hidden_sizes}")
        if not math.isfinite(self.leaky_slope):
            raise ValueError("leaky_slope must be finite")


@dataclass
class TrainRunRecord:
    """Everything a training run produced: config, history, final parameters."""

    config: TrainConfig
    train_losses: list[float] = field(default_factory=list)
    val_aucs: list[float] = field(default_factory=list)
    parameters: HeadParameters | None = None


def train(
    train_bags: list[FusedBag],
    val_bags: list[FusedBag] | None,
    config: TrainConfig,
    on_epoch: Callable[[int, float, float | None], None] | None = None,
) -> TrainRunRecord:
    """Train the head on fused bags; same seed and data give identical output.

    Each epoch pairs a shuffled normal ordering with a shuffled anomalous
    ordering, cycling the smaller class, and walks the pairs in mini-batches.
    ``on_epoch`` is called after each epoch with (epoch, mean loss, val AUC
    or None).
    """
    if not train_bags:
        raise ValueError("training set is empty")
    num_segments = train_bags[0].num_segments
    feature_dim = train_bags[0].feature_dim
    for bag in train_bags:
        if bag.num_segments != num_segments or bag.feature_dim != feature_dim:
            raise ValueError(
                f"bag '{bag.video_id}' shape ({bag.num_segments}, {bag.feature_dim}) "
                f"disagrees with ({num_segments}, {feature_dim})"
            )
    if config.k > num_segments:
        raise ValueError(f"k={config.k} exceeds {num_segments} segments per video")
    labels = np.array([bag.label for bag in train_bags])
    normal_idx = np.flatnonzero(labels == 0)
    anomalous_idx = np.flatnonzero(labels == 1)
    if normal_idx.size == 0 or anomalous_idx.size == 0:
        raise ValueError("training set must contain both a normal and an anomalous video")

    features = np.stack([bag.features for bag in train_bags])
    video_ids = [bag.video_id for bag in train_bags]
    val_features = None
    val_labels = None
    if val_bags:
        for bag in val_bags:
            if bag.num_segments != num_segments or bag.feature_dim != feature_dim:
                raise ValueError(f"validation bag '{bag.video_id}' shape disagrees with training")
        val_features = np.stack([bag.features for bag in val_bags])
        val_labels = np.array([bag.label for bag in val_bags])

    params = init_head_parameters(
        feature_dim,
        config.hidden_sizes,
        config.leaky_slope,
        rng=np.random.default_rng(config.seed),
    )
    opt = _AdamState(params, config)
    record = TrainRunRecord(config=config)

    for epoch in range(config.epochs):
        rng = _epoch_rng(config.seed, epoch)
        normal_order = rng.permutation(normal_idx)
        anomalous_order = rng.permutation(anomalous_idx)
        pair_count = max(normal_order.size, anomalous_order.size)
        normal_cycle = np.resize(normal_order, pair_count)
        anomalous_cycle = np.resize(anomalous_order, pair_count)

        loss_sum = 0.0
        loss_count = 0
        for lo in range(0, pair_count, config.batch_pairs):
            hi = min(lo + config.batch_pairs, pair_count)
            batch = np.concatenate([normal_cycle[lo:hi], anomalous_cycle[lo:hi]])
            batch_loss = _batch_step(batch, features, labels, video_ids, params, opt, config, epoch)
            loss_sum += batch_loss
            loss_count += 2 * (hi - lo)
        mean_loss = loss_sum / loss_count
        record.train_losses.append(mean_loss)

        val_auc = None
        if val_features is not None:
            val_probs = _pooled_probabilities(val_features, params, config.k)
            val_auc = roc_auc(val_probs, val_labels)
            record.val_aucs.append(val_auc)
        if on_epoch is not None:
            on_epoch(epoch + 1, mean_loss, val_auc)

    record.parameters = params
    return record


def score_video(bag: FusedBag, params: HeadParameters, k: int) -> tuple[float, np.ndarray]:
    """Per-segment scores and the pooled video probability for one bag."""
    scores, _ = head_forward(bag.features, params)
    pooled = topk_pool(scores, k)
    return pooled.probability, scores


class _AdamState:
    """First/second moment accumulators and the shared step counter."""

    def __init__(self, params: HeadParameters, config: TrainConfig):
        self.m_w = [np.zeros_like(w) for w in params.weights]
        self.v_w = [np.zeros_like(w) for w in params.weights]
        self.m_b = [np.zeros_like(b) for b in params.biases]
        self.v_b = [np.zeros_like(b) for b in params.biases]
        self.t = 0
        self.config = config

    def step(self, params: HeadParameters, grads) -> None:
        cfg = self.config
        self.t += 1
        correction_1 = 1.0 - cfg.moment_decay_1**self.t
        correction_2 = 1.0 - cfg.moment_decay_2**self.t
        for i in range(len(params.weights)):
            for theta, g, m, v in (
                (params.weights[i], grads.weights[i], self.m_w[i], self.v_w[i]),
                (params.biases[i], grads.biases[i], self.m_b[i], self.v_b[i]),
            ):
                m *= cfg.moment_decay_1
                m += (1.0 - cfg.moment_decay_1) * g
                v *= cfg.moment_decay_2
                v += (1.0 - cfg.moment_decay_2) * g * g
                m_hat = m / correction_1
                v_hat = v / correction_2
                theta -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)


def _epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    """Shuffle source: a pure function of (seed, epoch)."""
    return np.random.default_rng([seed, epoch])


def _batch_step(
    batch: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    video_ids: list[str],
    params: HeadParameters,
    opt: _AdamState,
    config: TrainConfig,
    epoch: int,
) -> float:
    """One forward/backward/update over a batch; returns the summed loss."""
    batch_size, num_segments = batch.size, features.shape[1]
    flat = features[batch].reshape(batch_size * num_segments, -1)
    scores_flat, cache = head_forward(flat, params)
    scores = scores_flat.reshape(batch_size, num_segments)
    finite_rows = np.isfinite(scores).all(axis=1)
    if not finite_rows.all():
        video = batch[int(np.flatnonzero(~finite_rows)[0])]
        raise NumericError(
            f"non-finite segment score for video '{video_ids[video]}' at epoch {epoch + 1}"
        )
    dscores = np.zeros_like(scores)
    loss_sum = 0.0
    for row, video in enumerate(batch):
        pooled = topk_pool(scores[row], config.k)
        if not math.isfinite(pooled.video_logit):
            raise NumericError(
                f"non-finite pooled logit for video '{video_ids[video]}' at epoch {epoch + 1}"
            )
        loss, dlogit = bce_from_logit(pooled.video_logit, int(labels[video]))
        loss_sum += loss
        dscores[row, list(pooled.selected_indices)] = dlogit / config.k
    grads, _ = head_backward(cache, params, (dscores / batch_size).reshape(-1))
    opt.step(params, grads)
    return loss_sum


def _pooled_probabilities(features: np.ndarray, params: HeadParameters, k: int) -> np.ndarray:
    """Pooled sigmoid probability per video for a stacked (videos, N, D) array."""
    count, num_segments, _ = features.shape
    scores, _ = head_forward(features.reshape(count * num_segments, -1), params)
    if not np.isfinite(scores).all():
        raise NumericError("non-finite segment score while scoring validation videos")
    scores = scores.reshape(count, num_segments)
    return np.array([topk_pool(scores[i], k).probability for i in range(count)])

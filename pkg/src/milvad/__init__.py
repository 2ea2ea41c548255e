"""Weakly supervised video anomaly detection on precomputed segment features.

A video is a bag of fixed-count temporal segments, each represented by two
backbone feature vectors. Training sees only video-level labels; the model
learns per-segment scores whose top-k mean is pushed toward the video label.
"""

__version__ = "0.1.0"

from .bagfile import (
    BagFileHeader,
    BagValidationReport,
    SegmentFeatureBag,
    read_bags,
    validate_bags,
    write_bags,
)
from .errors import (
    BadMagicError,
    BagFormatError,
    DimensionMismatchError,
    HeaderChecksumError,
    MilvadError,
    NonFiniteValueError,
    NumericError,
    TrailingDataError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .evaluation import EvalReport, EvalRow, evaluate, roc_auc
from .fusion import FusedBag, fuse_bag, l2_normalize
from .head import (
    HeadGradients,
    HeadParameters,
    head_backward,
    head_forward,
    init_head_parameters,
    load_checkpoint,
    save_checkpoint,
)
from .planning import SamplingPlan, VideoManifest, build_plan, plan_segments, sample_frames
from .pooling import PoolResult, bce_from_logit, pool_backward, topk_pool
from .synthetic import GroundTruthMask, SynthConfig, finite_diff_loss, generate, oracle_auc
from .training import TrainConfig, TrainRunRecord, score_video, train

__all__ = [
    "BadMagicError",
    "BagFileHeader",
    "BagFormatError",
    "BagValidationReport",
    "DimensionMismatchError",
    "EvalReport",
    "EvalRow",
    "FusedBag",
    "GroundTruthMask",
    "HeadGradients",
    "HeadParameters",
    "HeaderChecksumError",
    "MilvadError",
    "NonFiniteValueError",
    "NumericError",
    "PoolResult",
    "SamplingPlan",
    "SegmentFeatureBag",
    "SynthConfig",
    "TrailingDataError",
    "TrainConfig",
    "TrainRunRecord",
    "TruncatedFileError",
    "UnsupportedVersionError",
    "VideoManifest",
    "bce_from_logit",
    "build_plan",
    "evaluate",
    "finite_diff_loss",
    "fuse_bag",
    "generate",
    "head_backward",
    "head_forward",
    "init_head_parameters",
    "l2_normalize",
    "load_checkpoint",
    "oracle_auc",
    "plan_segments",
    "pool_backward",
    "read_bags",
    "roc_auc",
    "sample_frames",
    "save_checkpoint",
    "score_video",
    "topk_pool",
    "train",
    "validate_bags",
    "write_bags",
]

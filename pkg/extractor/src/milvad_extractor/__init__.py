"""Extraction bridge: raw videos in, milvad feature-store files out."""

from .bagwriter import VideoFeatures, write_store
from .encoders import ClipEncoder, ProjectionEncoder, TorchscriptEncoder, parse_encoder
from .extract import DimensionMismatchError, ExtractionSummary, extract
from .manifest import ManifestRow, read_manifest
from .plan import clip_indices, plan_lines, segment_bounds, video_plan
from .video import VideoDecodeError, count_frames, read_frames

__version__ = "0.1.0"

__all__ = [
    "ClipEncoder",
    "DimensionMismatchError",
    "ExtractionSummary",
    "ManifestRow",
    "ProjectionEncoder",
    "TorchscriptEncoder",
    "VideoDecodeError",
    "VideoFeatures",
    "clip_indices",
    "count_frames",
    "extract",
    "parse_encoder",
    "plan_lines",
    "read_frames",
    "read_manifest",
    "segment_bounds",
    "video_plan",
    "write_store",
]

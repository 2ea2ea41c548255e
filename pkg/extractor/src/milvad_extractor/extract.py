"""Extraction orchestration: manifest rows in, one feature-store file out."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bagwriter import VideoFeatures, write_store
from .encoders import ClipEncoder
from .manifest import ManifestRow
from .plan import video_plan
from .video import VideoDecodeError, count_frames, read_frames

log = logging.getLogger("vadbridge")


class DimensionMismatchError(Exception):
    """An encoder changed its output width mid-run; the header would lie."""


@dataclass(frozen=True)
class ExtractionSummary:
    out_path: Path
    written: int
    skipped: tuple[str, ...]
    num_segments: int
    i3d_dim: int
    tsf_dim: int


def extract(
    rows: list[ManifestRow],
    out_path: str | Path,
    i3d_encoder: ClipEncoder,
    tsf_encoder: ClipEncoder,
    num_segments: int = 32,
    frames_per_segment: int = 16,
) -> ExtractionSummary:
    """Encode every manifest video and write one container file.

    An undecodable video is skipped with a warning and counted in the
    summary. A video whose encoder output width disagrees with the videos
    before it aborts the run: nothing is written in that case, because the
    header must state one true dimensionality for the whole file.
    """
    videos: list[VideoFeatures] = []
    skipped: list[str] = []
    dims: tuple[int, int] | None = None
    for row in rows:
        try:
            clips = _decode_clips(row.path, num_segments, frames_per_segment)
        except VideoDecodeError as exc:
            log.warning("skipped %s: %s", row.video_id, exc)
            skipped.append(row.video_id)
            continue
        i3d = _encode_stream(i3d_encoder, clips, row.video_id)
        tsf = _encode_stream(tsf_encoder, clips, row.video_id)
        if dims is None:
            dims = (i3d.shape[1], tsf.shape[1])
        elif dims != (i3d.shape[1], tsf.shape[1]):
            raise DimensionMismatchError(
                f"video '{row.video_id}' produced dims "
                f"{(i3d.shape[1], tsf.shape[1])}, header committed to {dims}"
            )
        videos.append(VideoFeatures(video_id=row.video_id, label=row.label, i3d=i3d, tsf=tsf))
    if not videos:
        raise ValueError("no decodable videos in manifest, nothing to write")
    write_store(out_path, videos)
    return ExtractionSummary(
        out_path=Path(out_path),
        written=len(videos),
        skipped=tuple(skipped),
        num_segments=num_segments,
        i3d_dim=dims[0],
        tsf_dim=dims[1],
    )


def _decode_clips(
    path: Path, num_segments: int, frames_per_segment: int
) -> list[np.ndarray]:
    """Decode one video into its per-segment (F, H, W, 3) clips."""
    frames_total = count_frames(path)
    plan = video_plan(frames_total, num_segments, frames_per_segment)
    wanted = {index for _, _, indices in plan for index in indices}
    frames = read_frames(path, wanted)
    clips = []
    for _, _, indices in plan:
        clips.append(np.stack([frames[index] for index in indices]))
    return clips


def _encode_stream(
    encoder: ClipEncoder, clips: list[np.ndarray], video_id: str
) -> np.ndarray:
    vectors = []
    width = None
    for segment, clip in enumerate(clips):
        vector = np.asarray(encoder.encode(clip), dtype=np.float32)
        if vector.ndim != 1 or vector.size == 0:
            raise ValueError(
                f"encoder {encoder.name} returned shape {vector.shape} for "
                f"video '{video_id}' segment {segment}, expected a vector"
            )
        if width is None:
            width = vector.size
        elif vector.size != width:
            raise DimensionMismatchError(
                f"encoder {encoder.name} switched width {width} -> {vector.size} "
                f"within video '{video_id}' at segment {segment}"
            )
        vectors.append(vector)
    return np.stack(vectors)

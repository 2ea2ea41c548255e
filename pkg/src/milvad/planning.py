"""Temporal segmentation and frame-sampling index arithmetic.

Everything here is exact integer arithmetic on 0-based frame indices; no
pixel data is touched. A video with ``T`` frames is split into ``N``
contiguous segments with boundaries ``floor(i * T / N)``, and each segment
contributes a fixed number of uniformly spaced frame indices, padding by
repetition when the segment holds fewer frames than the sample count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_NUM_SEGMENTS = 32
DEFAULT_FRAMES_PER_SEGMENT = 16

# Generous caps that keep the int64 index arithmetic overflow-free.
MAX_FRAME_COUNT = 10**12
MAX_SPLIT = 10**6


@dataclass(frozen=True)
class VideoManifest:
    """Per-video metadata: identity, length in frames, video-level label."""

    video_id: str
    frame_count: int
    label: int

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.frame_count < 1:
            raise ValueError(f"frame_count must be >= 1, got {self.frame_count}")
        if self.frame_count > MAX_FRAME_COUNT:
            raise ValueError(f"frame_count must be <= {MAX_FRAME_COUNT}")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class SamplingPlan:
    """Segment boundaries plus sampled frame indices for one video.

    ``segments[i]`` is the half-open frame range ``[start, end)`` of segment
    ``i``; ``sampled_indices[i]`` holds exactly ``frames_per_segment``
    non-decreasing frame indices for it.
    """

    video_id: str
    frame_count: int
    num_segments: int
    frames_per_segment: int
    segments: tuple[tuple[int, int], ...]
    sampled_indices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.segments) != self.num_segments:
            raise ValueError("segment count does not match num_segments")
        if len(self.sampled_indices) != self.num_segments:
            raise ValueError("sampled index rows do not match num_segments")
        if any(len(row) != self.frames_per_segment for row in self.sampled_indices):
            raise ValueError("sampled index row width does not match frames_per_segment")


def plan_segments(frame_count: int, num_segments: int) -> list[tuple[int, int]]:
    """Split ``[0, frame_count)`` into contiguous half-open ranges.

    Segment ``i`` covers ``[floor(i*T/N), floor((i+1)*T/N))``. The ranges
    partition the frame index set exactly; when ``frame_count < num_segments``
    some ranges come out empty and :func:`sample_frames` fills those by
    reusing the nearest preceding frame.
    """
    _check_positive("frame_count", frame_count, MAX_FRAME_COUNT)
    _check_positive("num_segments", num_segments, MAX_SPLIT)
    bounds = [(i * frame_count) // num_segments for i in range(num_segments + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(num_segments)]


def sample_frames(segment: tuple[int, int], frames_per_segment: int) -> list[int]:
    """Pick uniformly spaced frame indices from one segment range.

    A segment of length ``L >= frames_per_segment`` yields
    ``start + floor(j*L/F)``. A shorter non-empty segment yields every frame
    in order, padding by repeating the last one. An empty segment yields
    ``max(start - 1, 0)`` repeated: the nearest preceding frame, clamped to
    frame 0 at the very start of the video.
    """
    _check_positive("frames_per_segment", frames_per_segment, MAX_SPLIT)
    start, end = segment
    if start < 0 or end < start:
        raise ValueError(f"invalid segment range [{start}, {end})")
    if end > MAX_FRAME_COUNT:
        raise ValueError(f"segment end must be <= {MAX_FRAME_COUNT}")
    starts = np.array([start], dtype=np.int64)
    ends = np.array([end], dtype=np.int64)
    return [int(i) for i in _sample_matrix(starts, ends, frames_per_segment)[0]]


def build_plan(
    manifest: VideoManifest,
    num_segments: int = DEFAULT_NUM_SEGMENTS,
    frames_per_segment: int = DEFAULT_FRAMES_PER_SEGMENT,
) -> SamplingPlan:
    """Build the full per-video plan: boundaries plus sampled indices."""
    _check_positive("frames_per_segment", frames_per_segment, MAX_SPLIT)
    segments = plan_segments(manifest.frame_count, num_segments)
    bounds = np.array([s for s, _ in segments] + [segments[-1][1]], dtype=np.int64)
    sampled = _sample_matrix(bounds[:-1], bounds[1:], frames_per_segment)
    return SamplingPlan(
        video_id=manifest.video_id,
        frame_count=manifest.frame_count,
        num_segments=num_segments,
        frames_per_segment=frames_per_segment,
        segments=tuple(segments),
        sampled_indices=tuple(tuple(int(i) for i in row) for row in sampled),
    )


def plan_lines(plan: SamplingPlan) -> list[str]:
    """Render a plan in the line-per-segment text format.

    Each line is ``<segment> <start> <end> <idx_0> ... <idx_F-1>``, all
    space-separated decimal integers.
    """
    lines = []
    for i, ((start, end), indices) in enumerate(zip(plan.segments, plan.sampled_indices)):
        lines.append(f"{i} {start} {end} " + " ".join(str(j) for j in indices))
    return lines


def _sample_matrix(starts: np.ndarray, ends: np.ndarray, frames_per_segment: int) -> np.ndarray:
    """Vectorized sampling over many segments at once; rows follow sample_frames."""
    lengths = ends - starts
    j = np.arange(frames_per_segment, dtype=np.int64)
    uniform = starts[:, None] + (j[None, :] * lengths[:, None]) // frames_per_segment
    padded = starts[:, None] + np.minimum(j[None, :], np.maximum(lengths - 1, 0)[:, None])
    empty = np.maximum(starts - 1, 0)[:, None] + np.zeros_like(j)[None, :]
    out = np.where(
        (lengths >= frames_per_segment)[:, None],
        uniform,
        np.where((lengths >= 1)[:, None], padded, empty),
    )
    return out


def _check_positive(name: str, value: int, upper: int) -> None:
    if not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    if value > upper:
        raise ValueError(f"{name} must be <= {upper}, got {value}")

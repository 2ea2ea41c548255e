"""Temporal sampling arithmetic, reimplemented to cross-check the engine.

The contract is shared with the training engine's planner: segment i of an
N-way split covers frames [floor(i*T/N), floor((i+1)*T/N)), a segment at
least F frames long samples start + floor(j*L/F), a shorter one walks its
frames and repeats the last, and an empty one reuses the nearest preceding
frame (clamped to 0). This module derives those indices on its own so the
parity tests compare two codebases, not one.
"""

from __future__ import annotations


def segment_bounds(frame_count: int, num_segments: int) -> list[tuple[int, int]]:
    """Half-open [start, end) frame ranges of each segment."""
    if frame_count < 1:
        raise ValueError(f"frame_count must be >= 1, got {frame_count}")
    if num_segments < 1:
        raise ValueError(f"num_segments must be >= 1, got {num_segments}")
    return [
        (i * frame_count // num_segments, (i + 1) * frame_count // num_segments)
        for i in range(num_segments)
    ]


def clip_indices(start: int, end: int, frames_per_segment: int) -> list[int]:
    """Frame indices for one clip, padded to exactly frames_per_segment."""
    if frames_per_segment < 1:
        raise ValueError(f"frames_per_segment must be >= 1, got {frames_per_segment}")
    if start < 0 or end < start:
        raise ValueError(f"invalid segment range [{start}, {end})")
    length = end - start
    if length == 0:
        return [max(start - 1, 0)] * frames_per_segment
    if length < frames_per_segment:
        padding = [end - 1] * (frames_per_segment - length)
        return list(range(start, end)) + padding
    return [start + j * length // frames_per_segment for j in range(frames_per_segment)]


def video_plan(
    frame_count: int, num_segments: int, frames_per_segment: int
) -> list[tuple[int, int, list[int]]]:
    """(start, end, clip indices) for every segment of one video."""
    return [
        (start, end, clip_indices(start, end, frames_per_segment))
        for start, end in segment_bounds(frame_count, num_segments)
    ]


def plan_lines(frame_count: int, num_segments: int, frames_per_segment: int) -> list[str]:
    """Render a plan in the engine CLI's line format for byte comparison."""
    return [
        f"{i} {start} {end} " + " ".join(str(idx) for idx in indices)
        for i, (start, end, indices) in enumerate(
            video_plan(frame_count, num_segments, frames_per_segment)
        )
    ]

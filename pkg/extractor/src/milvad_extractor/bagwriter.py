"""Writer for the engine's feature-store container, implemented from the
published layout rather than shared code.

Little-endian throughout. Header: magic `MILBAGS1`, u32 version (1), u32
video count, u32 segments per video, u32 dim of each stream, then a CRC-32
of those 28 bytes. Each record: u32 id byte length, UTF-8 id, one label
byte, then the two float32 feature matrices row-major. Keeping this
implementation separate means a drift in either codebase shows up as a
validation failure instead of silently round-tripping.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"MILBAGS1"
FORMAT_VERSION = 1
_HEADER_BODY = struct.Struct("<8s5I")


@dataclass(frozen=True)
class VideoFeatures:
    """Raw per-segment vectors of one video, one matrix per stream."""

    video_id: str
    label: int
    i3d: np.ndarray
    tsf: np.ndarray

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        for name in ("i3d", "tsf"):
            matrix = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float32))
            if matrix.ndim != 2 or matrix.size == 0:
                raise ValueError(f"{name} features must be a non-empty 2-d array")
            if not np.isfinite(matrix).all():
                raise ValueError(f"{name} features contain non-finite values")
            object.__setattr__(self, name, matrix)
        if self.i3d.shape[0] != self.tsf.shape[0]:
            raise ValueError(
                f"stream segment counts differ: {self.i3d.shape[0]} vs {self.tsf.shape[0]}"
            )


def write_store(path: str | Path, videos: list[VideoFeatures]) -> None:
    """Write all videos to one container file, validating shapes first."""
    if not videos:
        raise ValueError("refusing to write an empty feature store")
    num_segments, i3d_dim = videos[0].i3d.shape
    tsf_dim = videos[0].tsf.shape[1]
    for video in videos:
        if video.i3d.shape != (num_segments, i3d_dim) or video.tsf.shape != (
            num_segments,
            tsf_dim,
        ):
            raise ValueError(
                f"video '{video.video_id}' has shapes {video.i3d.shape}/{video.tsf.shape}, "
                f"expected {(num_segments, i3d_dim)}/{(num_segments, tsf_dim)}"
            )
    body = _HEADER_BODY.pack(MAGIC, FORMAT_VERSION, len(videos), num_segments, i3d_dim, tsf_dim)
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body)))
        for video in videos:
            encoded = video.video_id.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("B", video.label))
            fh.write(video.i3d.tobytes(order="C"))
            fh.write(video.tsf.tobytes(order="C"))

"""Binary container for per-video segment features from two backbones.

Layout, all little-endian:

* header (32 bytes): magic ``MILBAGS1``, then u32 fields ``format_version``,
  ``video_count``, ``num_segments``, ``i3d_dim``, ``tsf_dim``, then a u32
  CRC-32 over the preceding 28 header bytes.
* per video, in file order: u32 byte length of the UTF-8 video id, the id
  bytes, one label byte (0 or 1), the i3d matrix, the tsf matrix. Matrices
  are row-major float32, shapes ``(num_segments, dim)``.

Values are stored as float32; everything downstream computes in float64.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    BagFormatError,
    DimensionMismatchError,
    HeaderChecksumError,
    NonFiniteValueError,
    TrailingDataError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"MILBAGS1"
FORMAT_VERSION = 1

_HEADER_BODY = struct.Struct("<8s5I")
_U32 = struct.Struct("<I")
HEADER_SIZE = _HEADER_BODY.size + _U32.size


@dataclass
class SegmentFeatureBag:
    """One video's worth of per-segment features plus its binary label."""

    video_id: str
    label: int
    i3d_features: np.ndarray
    tsf_features: np.ndarray

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        self.i3d_features = np.ascontiguousarray(self.i3d_features, dtype=np.float32)
        self.tsf_features = np.ascontiguousarray(self.tsf_features, dtype=np.float32)
        for name, matrix in (("i3d", self.i3d_features), ("tsf", self.tsf_features)):
            if matrix.ndim != 2:
                raise ValueError(f"{name} features must be 2-d, got {matrix.ndim}-d")
            if matrix.shape[0] < 1 or matrix.shape[1] < 1:
                raise ValueError(f"{name} features must be non-empty, got {matrix.shape}")
            if not np.isfinite(matrix).all():
                raise ValueError(f"{name} features of '{self.video_id}' contain non-finite values")
        if self.i3d_features.shape[0] != self.tsf_features.shape[0]:
            raise ValueError(
                "segment counts disagree: "
                f"i3d has {self.i3d_features.shape[0]}, tsf has {self.tsf_features.shape[0]}"
            )

    @property
    def num_segments(self) -> int:
        return self.i3d_features.shape[0]

    @property
    def i3d_dim(self) -> int:
        return self.i3d_features.shape[1]

    @property
    def tsf_dim(self) -> int:
        return self.tsf_features.shape[1]


@dataclass(frozen=True)
class BagFileHeader:
    """Decoded fixed-size header of a bag file."""

    format_version: int
    video_count: int
    num_segments: int
    i3d_dim: int
    tsf_dim: int


def write_bags(path: str | Path, bags: list[SegmentFeatureBag]) -> None:
    """Serialize bags to ``path``, validating shapes before any byte is written.

    All bags must agree on ``(num_segments, i3d_dim, tsf_dim)``; the list must
    be non-empty. On shape disagreement raises DimensionMismatchError without
    touching the file.
    """
    if not bags:
        raise ValueError("cannot write an empty bag list")
    first = bags[0]
    shape = (first.num_segments, first.i3d_dim, first.tsf_dim)
    for bag in bags:
        got = (bag.num_segments, bag.i3d_dim, bag.tsf_dim)
        if got != shape:
            raise DimensionMismatchError(
                f"bag '{bag.video_id}' has (segments, i3d, tsf) = {got}, expected {shape}"
            )
    header = BagFileHeader(FORMAT_VERSION, len(bags), *shape)
    with open(path, "wb") as fh:
        fh.write(_pack_header(header))
        for bag in bags:
            ident = bag.video_id.encode("utf-8")
            fh.write(_U32.pack(len(ident)))
            fh.write(ident)
            fh.write(bytes([bag.label]))
            fh.write(bag.i3d_features.astype("<f4", copy=False).tobytes())
            fh.write(bag.tsf_features.astype("<f4", copy=False).tobytes())


def read_bags(path: str | Path) -> list[SegmentFeatureBag]:
    """Read and fully validate a bag file.

    Raises a BagFormatError subclass naming the problem: bad magic,
    unsupported version, header corruption, truncation (with the record
    index), trailing bytes, or a non-finite stored value (with video,
    stream, segment and column).
    """
    with open(path, "rb") as fh:
        header = read_header(fh.read(HEADER_SIZE))
        bags = [_read_record(fh, header, i) for i in range(header.video_count)]
        if fh.read(1):
            raise TrailingDataError(
                f"trailing bytes after {header.video_count} declared videos"
            )
    return bags


def read_header(raw: bytes) -> BagFileHeader:
    """Decode and verify a 32-byte header."""
    if len(raw) < HEADER_SIZE:
        raise TruncatedFileError("file ends inside the header")
    magic, version, video_count, num_segments, i3d_dim, tsf_dim = _HEADER_BODY.unpack(
        raw[: _HEADER_BODY.size]
    )
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}")
    (stored_crc,) = _U32.unpack(raw[_HEADER_BODY.size : HEADER_SIZE])
    actual_crc = zlib.crc32(raw[: _HEADER_BODY.size])
    if stored_crc != actual_crc:
        raise HeaderChecksumError(
            f"header checksum mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )
    if video_count < 1:
        raise BagFormatError("header declares zero videos")
    if num_segments < 1 or i3d_dim < 1 or tsf_dim < 1:
        raise DimensionMismatchError(
            f"header declares non-positive shape ({num_segments}, {i3d_dim}, {tsf_dim})"
        )
    return BagFileHeader(version, video_count, num_segments, i3d_dim, tsf_dim)


@dataclass
class BagValidationReport:
    """Outcome of validating a bag file, plus summary statistics when valid."""

    path: str
    ok: bool
    error: str | None = None
    video_count: int = 0
    num_segments: int = 0
    i3d_dim: int = 0
    tsf_dim: int = 0
    normal_count: int = 0
    anomalous_count: int = 0
    video_ids: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        if not self.ok:
            return [f"{self.path}: INVALID", f"error: {self.error}"]
        return [
            f"{self.path}: OK",
            f"{self.video_count} videos, labels: {self.normal_count}/{self.anomalous_count}",
            f"segments per video: {self.num_segments}",
            f"feature dims: i3d={self.i3d_dim} tsf={self.tsf_dim} "
            f"(fused {self.i3d_dim + self.tsf_dim})",
        ]


def validate_bags(path: str | Path) -> BagValidationReport:
    """Validate a bag file without raising; the report carries the verdict."""
    try:
        bags = read_bags(path)
    except (BagFormatError, OSError, ValueError) as exc:
        return BagValidationReport(path=str(path), ok=False, error=str(exc))
    normal = sum(1 for bag in bags if bag.label == 0)
    return BagValidationReport(
        path=str(path),
        ok=True,
        video_count=len(bags),
        num_segments=bags[0].num_segments,
        i3d_dim=bags[0].i3d_dim,
        tsf_dim=bags[0].tsf_dim,
        normal_count=normal,
        anomalous_count=len(bags) - normal,
        video_ids=[bag.video_id for bag in bags],
    )


def _pack_header(header: BagFileHeader) -> bytes:
    body = _HEADER_BODY.pack(
        MAGIC,
        header.format_version,
        header.video_count,
        header.num_segments,
        header.i3d_dim,
        header.tsf_dim,
    )
    return body + _U32.pack(zlib.crc32(body))


def _read_exact(fh, count: int, record: int) -> bytes:
    data = fh.read(count)
    if len(data) < count:
        raise TruncatedFileError(f"file ends inside record {record}")
    return data


def _read_record(fh, header: BagFileHeader, record: int) -> SegmentFeatureBag:
    (id_len,) = _U32.unpack(_read_exact(fh, 4, record))
    try:
        video_id = _read_exact(fh, id_len, record).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BagFormatError(f"record {record}: video id is not valid UTF-8") from exc
    if not video_id:
        raise BagFormatError(f"record {record}: empty video id")
    label = _read_exact(fh, 1, record)[0]
    if label not in (0, 1):
        raise BagFormatError(f"record {record} ('{video_id}'): label byte is {label}, not 0 or 1")
    i3d = _read_matrix(fh, header.num_segments, header.i3d_dim, record)
    tsf = _read_matrix(fh, header.num_segments, header.tsf_dim, record)
    _check_finite(video_id, "i3d", i3d)
    _check_finite(video_id, "tsf", tsf)
    return SegmentFeatureBag(video_id, label, i3d, tsf)


def _read_matrix(fh, rows: int, cols: int, record: int) -> np.ndarray:
    raw = _read_exact(fh, 4 * rows * cols, record)
    return np.frombuffer(raw, dtype="<f4").reshape(rows, cols)


def _check_finite(video_id: str, stream: str, matrix: np.ndarray) -> None:
    finite = np.isfinite(matrix)
    if not finite.all():
        segment, column = np.argwhere(~finite)[0]
        raise NonFiniteValueError(video_id, stream, int(segment), int(column))

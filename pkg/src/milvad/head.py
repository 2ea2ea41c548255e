"""Four-layer fully connected scoring head with closed-form gradients.

The head maps one feature row to one scalar segment score. LeakyReLU sits
between layers; the last layer has no activation. Forward and backward are
written out explicitly so gradients can be checked against finite
differences coordinate by coordinate.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    BagFormatError,
    HeaderChecksumError,
    TrailingDataError,
    TruncatedFileError,
    UnsupportedVersionError,
)

NUM_LAYERS = 4
DEFAULT_HIDDEN_SIZES = (512, 128, 32)
DEFAULT_LEAKY_SLOPE = 0.01

CHECKPOINT_MAGIC = b"MILHEAD1"
CHECKPOINT_VERSION = 1


@dataclass
class HeadParameters:
    """Weights ``(fan_in, fan_out)`` and biases ``(fan_out,)`` for each layer."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        if len(self.weights) != NUM_LAYERS or len(self.biases) != NUM_LAYERS:
            raise ValueError(f"expected {NUM_LAYERS} weight/bias pairs")
        self.weights = [np.ascontiguousarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.ascontiguousarray(b, dtype=np.float64) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError(f"layer {i}: weight shape {w.shape} and bias shape {b.shape} disagree")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {i}: fan-in {w.shape[0]} does not chain")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {i}: non-finite parameter values")
        if self.weights[-1].shape[1] != 1:
            raise ValueError("last layer must have a single output")
        if not math.isfinite(self.leaky_slope):
            raise ValueError("leaky_slope must be finite")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(w.shape[1] for w in self.weights)

    def copy(self) -> "HeadParameters":
        return HeadParameters(
            [w.copy() for w in self.weights], [b.copy() for b in self.biases], self.leaky_slope
        )


@dataclass
class HeadGradients:
    """Parameter gradients, shaped exactly like HeadParameters arrays."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class ForwardCache:
    """Intermediates needed by the backward pass for one forward call."""

    inputs: np.ndarray
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]


def init_head_parameters(
    input_dim: int,
    hidden_sizes: tuple[int, int, int] = DEFAULT_HIDDEN_SIZES,
    leaky_slope: float = DEFAULT_LEAKY_SLOPE,
    rng: np.random.Generator | None = None,
) -> HeadParameters:
    """Seeded init: weights uniform in +-sqrt(6/fan_in), biases zero."""
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    if len(hidden_sizes) != NUM_LAYERS - 1 or any(h < 1 for h in hidden_sizes):
        raise ValueError(f"hidden_sizes must be {NUM_LAYERS - 1} positive ints, got {hidden_sizes}")
    if rng is None:
        rng = np.random.default_rng(0)
    sizes = (input_dim, *hidden_sizes, 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return HeadParameters(weights, biases, leaky_slope)


def head_forward(features: np.ndarray, params: HeadParameters) -> tuple[np.ndarray, ForwardCache]:
    """Score each feature row; returns the (rows,) scores and a backward cache."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-d, got {x.ndim}-d")
    if x.shape[1] != params.input_dim:
        raise ValueError(f"feature width {x.shape[1]} != head input width {params.input_dim}")
    slope = params.leaky_slope
    pre_activations: list[np.ndarray] = []
    activations: list[np.ndarray] = []
    a = x
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w + b
        pre_activations.append(z)
        if layer < NUM_LAYERS - 1:
            a = np.where(z >= 0, z, slope * z)
            activations.append(a)
    return pre_activations[-1][:, 0], ForwardCache(x, pre_activations, activations)


def head_backward(
    cache: ForwardCache, params: HeadParameters, dscores: np.ndarray
) -> tuple[HeadGradients, np.ndarray]:
    """Exact gradients of sum(dscores * scores) w.r.t. parameters and inputs.

    The LeakyReLU derivative is taken as 1 for positive pre-activations and
    the slope otherwise, including at exactly zero.
    """
    d = np.asarray(dscores, dtype=np.float64)
    if d.shape != (cache.inputs.shape[0],):
        raise ValueError(f"dscores shape {d.shape} does not match {cache.inputs.shape[0]} rows")
    grads_w: list[np.ndarray] = [np.empty(0)] * NUM_LAYERS
    grads_b: list[np.ndarray] = [np.empty(0)] * NUM_LAYERS
    delta = d[:, None]
    dfeatures = np.empty(0)
    for layer in reversed(range(NUM_LAYERS)):
        a_prev = cache.inputs if layer == 0 else cache.activations[layer - 1]
        grads_w[layer] = a_prev.T @ delta
        grads_b[layer] = delta.sum(axis=0)
        upstream = delta @ params.weights[layer].T
        if layer == 0:
            dfeatures = upstream
        else:
            z = cache.pre_activations[layer - 1]
            delta = upstream * np.where(z > 0, 1.0, params.leaky_slope)
    return HeadGradients(grads_w, grads_b), dfeatures


def coordinate_count(params: HeadParameters) -> int:
    """Total number of scalar parameters."""
    return sum(w.size + b.size for w, b in zip(params.weights, params.biases))


def perturb_coordinate(params: HeadParameters, coordinate: int, delta: float) -> HeadParameters:
    """Copy of params with one scalar nudged by delta.

    Coordinates enumerate W1 row-major, then b1, then W2, b2, and so on.
    """
    if not 0 <= coordinate < coordinate_count(params):
        raise ValueError(f"coordinate {coordinate} out of range")
    out = params.copy()
    offset = coordinate
    for w, b in zip(out.weights, out.biases):
        for array in (w, b):
            if offset < array.size:
                array.reshape(-1)[offset] += delta
                return out
            offset -= array.size
    raise AssertionError("unreachable")


def flatten_gradients(grads: HeadGradients) -> np.ndarray:
    """Concatenate gradients in the perturb_coordinate coordinate order."""
    parts = []
    for w, b in zip(grads.weights, grads.biases):
        parts.append(w.reshape(-1))
        parts.append(b.reshape(-1))
    return np.concatenate(parts)


def save_checkpoint(path: str | Path, params: HeadParameters) -> None:
    """Write parameters to a little-endian binary checkpoint.

    Layout: magic ``MILHEAD1``, u32 version, f64 leaky slope, u32 layer
    count, u32 layer sizes (input first), u32 CRC-32 of the header bytes so
    far, then per layer the float32 row-major weight matrix and bias vector.
    """
    sizes = params.layer_sizes()
    header = CHECKPOINT_MAGIC
    header += struct.pack("<I", CHECKPOINT_VERSION)
    header += struct.pack("<d", params.leaky_slope)
    header += struct.pack("<I", NUM_LAYERS)
    header += struct.pack(f"<{len(sizes)}I", *sizes)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<I", zlib.crc32(header)))
        for w, b in zip(params.weights, params.biases):
            fh.write(w.astype("<f4").tobytes())
            fh.write(b.astype("<f4").tobytes())


def load_checkpoint(path: str | Path) -> HeadParameters:
    """Read a checkpoint written by save_checkpoint, verifying the layout."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if len(magic) < len(CHECKPOINT_MAGIC):
            raise TruncatedFileError("checkpoint ends inside the magic tag")
        if magic != CHECKPOINT_MAGIC:
            raise BadMagicError(f"bad checkpoint magic {magic!r}, expected {CHECKPOINT_MAGIC!r}")
        fixed = _read_or_truncated(fh, 16, "checkpoint header")
        version, slope, num_layers = struct.unpack("<IdI", fixed)
        if version != CHECKPOINT_VERSION:
            raise UnsupportedVersionError(f"unsupported checkpoint version {version}")
        if num_layers != NUM_LAYERS:
            raise BagFormatError(f"checkpoint declares {num_layers} layers, expected {NUM_LAYERS}")
        sizes_raw = _read_or_truncated(fh, 4 * (num_layers + 1), "checkpoint header")
        sizes = struct.unpack(f"<{num_layers + 1}I", sizes_raw)
        (stored_crc,) = struct.unpack("<I", _read_or_truncated(fh, 4, "checkpoint header"))
        actual_crc = zlib.crc32(magic + fixed + sizes_raw)
        if stored_crc != actual_crc:
            raise HeaderChecksumError(
                f"checkpoint header checksum mismatch: stored {stored_crc:#010x}, "
                f"computed {actual_crc:#010x}"
            )
        if any(s < 1 for s in sizes) or sizes[-1] != 1:
            raise BagFormatError(f"checkpoint declares invalid layer sizes {sizes}")
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w_raw = _read_or_truncated(fh, 4 * fan_in * fan_out, "weight matrix")
            b_raw = _read_or_truncated(fh, 4 * fan_out, "bias vector")
            weights.append(np.frombuffer(w_raw, dtype="<f4").reshape(fan_in, fan_out))
            biases.append(np.frombuffer(b_raw, dtype="<f4"))
        if fh.read(1):
            raise TrailingDataError("trailing bytes after checkpoint payload")
    return HeadParameters(weights, biases, slope)


def _read_or_truncated(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) < count:
        raise TruncatedFileError(f"checkpoint ends inside {what}")
    return data

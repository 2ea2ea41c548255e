"""Clip encoders: anything mapping a (F, H, W, 3) uint8 clip to one vector.

The output dimensionality is whatever the encoder produces; the file header
records the observed value. Two built-ins are provided: a seeded random
projection that needs no model weights (useful for toy corpora and tests),
and a TorchScript wrapper for real pretrained backbones.
"""

from __future__ import annotations

import math
from typing import Protocol

import cv2
import numpy as np


class ClipEncoder(Protocol):
    name: str

    def encode(self, clip: np.ndarray) -> np.ndarray: ...


def _check_clip(clip: np.ndarray) -> np.ndarray:
    clip = np.asarray(clip)
    if clip.ndim != 4 or clip.shape[3] != 3:
        raise ValueError(f"clip must have shape (frames, h, w, 3), got {clip.shape}")
    if clip.dtype != np.uint8:
        raise ValueError(f"clip must be uint8, got {clip.dtype}")
    return clip


class ProjectionEncoder:
    """Grayscale-downsample each frame, average, and randomly project.

    The projection matrix is a pure function of (seed, patch, dim), so the
    encoder is deterministic across runs and machines with no weights file.
    """

    def __init__(self, dim: int = 24, seed: int = 0, patch: int = 16):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if patch < 1:
            raise ValueError(f"patch must be >= 1, got {patch}")
        if seed < 0:
            raise ValueError(f"seed must be >= 0, got {seed}")
        self.name = f"projection:dim={dim},seed={seed},patch={patch}"
        self._patch = patch
        rng = np.random.default_rng(seed)
        self._projection = rng.standard_normal((patch * patch, dim)) / math.sqrt(patch * patch)

    def encode(self, clip: np.ndarray) -> np.ndarray:
        clip = _check_clip(clip)
        pooled = np.zeros(self._patch * self._patch, dtype=np.float64)
        for frame in clip:
            gray = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)
            small = cv2.resize(gray, (self._patch, self._patch), interpolation=cv2.INTER_AREA)
            pooled += small.reshape(-1) / 255.0
        pooled /= len(clip)
        return (pooled @ self._projection).astype(np.float32)


class TorchscriptEncoder:
    """Run a traced/scripted module on the clip.

    The module receives a float32 tensor of shape (frames, h, w, 3) scaled
    to [0, 1] and must return a 1-d tensor. Any input normalization or
    layout change beyond that belongs inside the exported module.
    """

    def __init__(self, path: str):
        import torch  # deliberately optional; only this encoder needs it

        self._torch = torch
        self.name = f"torchscript:path={path}"
        self._module = torch.jit.load(path, map_location="cpu")
        self._module.eval()

    def encode(self, clip: np.ndarray) -> np.ndarray:
        clip = _check_clip(clip)
        tensor = self._torch.from_numpy(clip.astype(np.float32) / 255.0)
        with self._torch.no_grad():
            out = self._module(tensor)
        vector = out.detach().cpu().numpy()
        if vector.ndim != 1:
            raise ValueError(
                f"torchscript module must return a 1-d tensor, got shape {vector.shape}"
            )
        return vector.astype(np.float32)


def parse_encoder(spec: str) -> ClipEncoder:
    """Build an encoder from a spec string like `projection:dim=24,seed=7`."""
    kind, _, tail = spec.partition(":")
    options: dict[str, str] = {}
    if tail:
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key or not value:
                raise ValueError(f"malformed encoder option {item!r} in {spec!r}")
            if key in options:
                raise ValueError(f"duplicate encoder option {key!r} in {spec!r}")
            options[key] = value
    if kind == "projection":
        try:
            numeric = {key: int(value) for key, value in options.items()}
        except ValueError:
            raise ValueError(f"projection options must be integers: {spec!r}") from None
        unknown = set(numeric) - {"dim", "seed", "patch"}
        if unknown:
            raise ValueError(f"unknown projection options {sorted(unknown)} in {spec!r}")
        return ProjectionEncoder(**numeric)
    if kind == "torchscript":
        if set(options) != {"path"}:
            raise ValueError(f"torchscript spec needs exactly a path option: {spec!r}")
        return TorchscriptEncoder(options["path"])
    raise ValueError(f"unknown encoder kind {kind!r} in {spec!r}")

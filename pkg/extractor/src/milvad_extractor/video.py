"""Frame counting and indexed decoding on top of OpenCV.

Decoding is strictly sequential: seeking is codec-dependent and quietly
inexact for some containers, which would break run-to-run determinism.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np


class VideoDecodeError(Exception):
    """The file cannot be opened or does not yield the frames it claims."""


def count_frames(path: str | Path) -> int:
    """Number of decodable frames, trusting metadata only when plausible."""
    capture = cv2.VideoCapture(str(path))
    try:
        if not capture.isOpened():
            raise VideoDecodeError(f"cannot open video: {path}")
        reported = int(capture.get(cv2.CAP_PROP_FRAME_COUNT))
        if reported > 0:
            return reported
        count = 0
        while capture.grab():
            count += 1
        if count == 0:
            raise VideoDecodeError(f"video has no decodable frames: {path}")
        return count
    finally:
        capture.release()


def read_frames(path: str | Path, indices: set[int]) -> dict[int, np.ndarray]:
    """Decode the requested frame indices in one sequential pass.

    Returns BGR uint8 arrays keyed by index. Raises if any requested frame
    is beyond what the stream actually delivers, which catches containers
    whose frame-count metadata overstates the truth.
    """
    if not indices:
        raise ValueError("no frame indices requested")
    if min(indices) < 0:
        raise ValueError("frame indices must be >= 0")
    wanted = sorted(indices)
    frames: dict[int, np.ndarray] = {}
    capture = cv2.VideoCapture(str(path))
    try:
        if not capture.isOpened():
            raise VideoDecodeError(f"cannot open video: {path}")
        position = 0
        for index in wanted:
            while position <= index:
                grabbed = capture.grab()
                if not grabbed:
                    raise VideoDecodeError(
                        f"decode ended at frame {position} before reaching "
                        f"frame {index}: {path}"
                    )
                position += 1
            ok, frame = capture.retrieve()
            if not ok or frame is None:
                raise VideoDecodeError(f"failed to retrieve frame {index}: {path}")
            frames[index] = frame
    finally:
        capture.release()
    return frames

import subprocess
import sys

import cv2
import numpy as np
import pytest

ENGINE = (sys.executable, "-m", "milvad")
BRIDGE = (sys.executable, "-m", "milvad_extractor")


def run(command, *args, cwd=None):
    return subprocess.run(
        [*command, *args], cwd=cwd, capture_output=True, text=True, timeout=120
    )


def make_frame(index, height=48, width=64):
    # A moving gradient: frames differ from each other and between videos
    # once offset, so projections do not collapse to one point.
    ys = np.arange(height, dtype=np.int64)[:, None]
    xs = np.arange(width, dtype=np.int64)[None, :]
    base = ((ys * 4 + xs * 3 + index * 7) % 256).astype(np.uint8)
    return np.stack([base, np.roll(base, index, axis=1), base[::-1]], axis=2)


def write_video(path, frame_count, offset=0, height=48, width=64):
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"MJPG"), 10, (width, height)
    )
    assert writer.isOpened(), f"cannot create video writer for {path}"
    for index in range(frame_count):
        writer.write(make_frame(index + offset, height, width))
    writer.release()


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """Five decodable videos (one shorter than the segment count), one
    corrupt file, and a manifest listing all six with relative paths."""
    root = tmp_path_factory.mktemp("toy_corpus")
    lengths = {"clip_a": 40, "clip_b": 33, "clip_c": 21, "clip_d": 12, "clip_e": 5}
    labels = {"clip_a": 0, "clip_b": 0, "clip_c": 0, "clip_d": 1, "clip_e": 1}
    for offset, (name, count) in enumerate(lengths.items()):
        write_video(root / f"{name}.avi", count, offset=offset * 100)
    (root / "broken.avi").write_bytes(b"\x00" * 1024)
    lines = ["path,id,label"]
    lines += [f"{name}.avi,{name},{labels[name]}" for name in lengths]
    lines.append("broken.avi,broken,1")
    (root / "manifest.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return root

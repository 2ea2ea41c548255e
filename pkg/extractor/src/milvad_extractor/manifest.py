"""Extraction manifest parsing: one video per row, `path,id,label`."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

_COLUMNS = ("path", "id", "label")


@dataclass(frozen=True)
class ManifestRow:
    path: Path
    video_id: str
    label: int

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video id must be non-empty")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Parse a CSV manifest into validated rows.

    Relative video paths are resolved against the manifest's directory. An
    optional leading `path,id,label` header row is skipped. Every listed
    file must exist; whether it decodes is checked later, during
    extraction, where a bad file is a skip rather than a hard error.
    """
    manifest_path = Path(path)
    base = manifest_path.parent
    rows: list[ManifestRow] = []
    seen: set[str] = set()
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        for number, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if number == 1 and tuple(f.strip().lower() for f in record) == _COLUMNS:
                continue
            if len(record) != 3:
                raise ValueError(
                    f"{manifest_path}:{number}: expected 3 fields (path,id,label), "
                    f"got {len(record)}"
                )
            raw_path, video_id, raw_label = (field.strip() for field in record)
            if raw_label not in ("0", "1"):
                raise ValueError(
                    f"{manifest_path}:{number}: label must be 0 or 1, got {raw_label!r}"
                )
            if video_id in seen:
                raise ValueError(f"{manifest_path}:{number}: duplicate video id {video_id!r}")
            seen.add(video_id)
            video_path = Path(raw_path)
            if not video_path.is_absolute():
                video_path = base / video_path
            if not video_path.is_file():
                raise ValueError(f"{manifest_path}:{number}: no such file: {video_path}")
            rows.append(ManifestRow(path=video_path, video_id=video_id, label=int(raw_label)))
    if not rows:
        raise ValueError(f"{manifest_path}: manifest lists no videos")
    return rows

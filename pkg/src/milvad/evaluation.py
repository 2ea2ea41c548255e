"""Video-level ROC-AUC by exact pair counting, and evaluation reports.

The AUC is the probability that a uniformly random positive video outscores
a uniformly random negative one, with ties worth half. Pairs are counted in
integer arithmetic, so the only rounding is the final division.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fusion import FusedBag
from .head import HeadParameters


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Exact Mann-Whitney AUC: (wins + ties/2) / (positives * negatives)."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or y.shape != s.shape:
        raise ValueError("scores and labels must be 1-d and equal length")
    if not np.isfinite(s).all():
        raise ValueError("scores contain non-finite values")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    positives = int(y.sum())
    negatives = int(y.size) - positives
    if positives == 0 or negatives == 0:
        raise ValueError("roc_auc needs at least one positive and one negative label")
    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    doubled_wins = 0  # wins count 2, ties count 1, to stay in integers
    negatives_below = 0
    i = 0
    n = s.size
    while i < n:
        j = i
        while j < n and s_sorted[j] == s_sorted[i]:
            j += 1
        group_pos = int(y_sorted[i:j].sum())
        group_neg = (j - i) - group_pos
        doubled_wins += group_pos * (2 * negatives_below + group_neg)
        negatives_below += group_neg
        i = j
    return doubled_wins / (2 * positives * negatives)


@dataclass(frozen=True)
class EvalRow:
    """Per-video evaluation output."""

    video_id: str
    label: int
    probability: float


@dataclass
class EvalReport:
    """AUC plus per-video rows sorted by descending probability."""

    auc: float
    video_count: int
    rows: list[EvalRow]

    def csv_lines(self) -> list[str]:
        lines = ["video_id,label,probability"]
        lines += [f"{r.video_id},{r.label},{r.probability:.6f}" for r in self.rows]
        lines.append(f"AUC,{self.auc:.6f}")
        return lines


def evaluate(bags: list[FusedBag], params: HeadParameters, k: int) -> EvalReport:
    """Score every bag, compute the AUC, and assemble the report."""
    # Imported here: the trainer module itself imports roc_auc from this one.
    from .training import score_video

    if not bags:
        raise ValueError("cannot evaluate an empty bag list")
    rows = []
    for bag in bags:
        probability, _ = score_video(bag, params, k)
        rows.append(EvalRow(bag.video_id, bag.label, probability))
    auc = roc_auc(
        np.array([r.probability for r in rows]), np.array([r.label for r in rows])
    )
    rows.sort(key=lambda r: (-r.probability, r.video_id))
    return EvalReport(auc=auc, video_count=len(rows), rows=rows)

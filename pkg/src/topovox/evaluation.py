"""Segmentation scoring against ground-truth label images with MCC.

Each segmented region is matched to the ground-truth region it overlaps
most, then scored as a per-pixel binary classification. Matthew's
correlation coefficient stays balanced for very differently sized
regions, which matters because door connections are tiny next to rooms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RegionScore:
    seg_label: int
    gt_label: int | None  # None: matched nothing but background
    tp: int
    fp: int
    fn: int
    tn: int
    mcc: float


@dataclass
class MccReport:
    scores: list[RegionScore]
    aggregate: float
    matching: dict[int, int | None]
    aggregation: str  # "pixel_weighted" or "mean"

    def to_dict(self) -> dict:
        return {
            "aggregate_mcc": self.aggregate,
            "aggregation": self.aggregation,
            "matching": {str(k): v for k, v in sorted(self.matching.items())},
            "regions": [
                {
                    "seg_label": s.seg_label,
                    "gt_label": s.gt_label,
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                    "tn": s.tn,
                    "mcc": s.mcc,
                }
                for s in self.scores
            ],
        }

    def table(self) -> str:
        lines = [f"{'seg':>5} {'gt':>5} {'tp':>8} {'fp':>8} {'fn':>8} {'tn':>8} {'mcc':>8}"]
        for s in self.scores:
            gt = "-" if s.gt_label is None else str(s.gt_label)
            lines.append(
                f"{s.seg_label:>5} {gt:>5} {s.tp:>8} {s.fp:>8} {s.fn:>8} {s.tn:>8} {s.mcc:>8.4f}"
            )
        lines.append(f"aggregate ({self.aggregation}): {self.aggregate:.4f}")
        return "\n".join(lines)


def mcc(tp: int, fp: int, fn: int, tn: int) -> float:
    """Correlation of predicted vs actual membership; 0 on degenerate counts."""
    if min(tp, fp, fn, tn) < 0:
        raise ValueError("counts must be non-negative")
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / np.sqrt(float(denom))


def match_regions(seg: np.ndarray, gt: np.ndarray) -> dict[int, int | None]:
    """Map every segmented label to the gt label of maximum pixel overlap.

    Ties break toward the smaller gt label; a segment lying entirely on
    background matches None. Background (label 0) is never matched.
    """
    seg = np.asarray(seg)
    gt = np.asarray(gt)
    if seg.shape != gt.shape:
        raise ValueError(f"image dimensions differ: {seg.shape} vs {gt.shape}")
    out: dict[int, int | None] = {}
    for s in sorted(int(v) for v in np.unique(seg) if v > 0):
        mask = seg == s
        overlap_labels, counts = np.unique(gt[mask], return_counts=True)
        keep = overlap_labels > 0
        overlap_labels, counts = overlap_labels[keep], counts[keep]
        if len(counts) == 0:
            out[s] = None
            continue
        best = counts.max()
        out[s] = int(overlap_labels[counts == best].min())
    return out


def evaluate(seg: np.ndarray, gt: np.ndarray, aggregation: str = "pixel_weighted") -> MccReport:
    """Per-region confusion counts and MCC, plus the aggregate score.

    The aggregate is the pixel-weighted mean over matched regions
    (weights = gt region size) by default, or the plain mean with
    aggregation="mean" where unmatched segments count too.
    """
    if aggregation not in ("pixel_weighted", "mean"):
        raise ValueError(f"unknown aggregation {aggregation!r}")
    matching = match_regions(seg, gt)
    n_pixels = seg.size
    scores = []
    for s, g in sorted(matching.items()):
        seg_mask = seg == s
        gt_mask = gt == g if g is not None else np.zeros_like(seg_mask)
        tp = int((seg_mask & gt_mask).sum())
        fp = int((seg_mask & ~gt_mask).sum())
        fn = int((~seg_mask & gt_mask).sum())
        tn = n_pixels - tp - fp - fn
        scores.append(
            RegionScore(seg_label=s, gt_label=g, tp=tp, fp=fp, fn=fn, tn=tn,
                        mcc=mcc(tp, fp, fn, tn))
        )
    if aggregation == "pixel_weighted":
        weights = np.array([s.tp + s.fn for s in scores], dtype=float)
        values = np.array([s.mcc for s in scores])
        aggregate = float((weights * values).sum() / weights.sum()) if weights.sum() else 0.0
    else:
        aggregate = float(np.mean([s.mcc for s in scores])) if scores else 0.0
    return MccReport(scores=scores, aggregate=aggregate, matching=matching,
                     aggregation=aggregation)

"""Temporal forgery localization: AP at IoU thresholds, mAP, AR at budgets.

Proposals are matched to ground-truth regions greedily in corpus-wide
confidence order, one-to-one within each utterance, taking the highest-IoU
unmatched region at or above the IoU threshold. Ranking ties break by
utt_id, then start, then end, so results never depend on input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scoring import SegmentScores
from .timeline import Segmentation

DEFAULT_IOU_THRESHOLDS = (0.5, 0.75, 0.9, 0.95)
DEFAULT_RECALL_BUDGETS = (1, 2, 5, 10, 20)
AR_IOU_GRID = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class LocalizationProposal:
    utt_id: str
    start: float
    end: float
    confidence: float

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"empty proposal interval [{self.start}, {self.end})")
        if not math.isfinite(self.confidence):
            raise ValueError("confidence must be finite")


@dataclass(frozen=True)
class GroundTruthRegion:
    utt_id: str
    start: float
    end: float

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"empty region interval [{self.start}, {self.end})")


def iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Temporal intersection over union of two intervals; 0 when disjoint."""
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union


def _ranked(proposals) -> list[LocalizationProposal]:
    return sorted(proposals, key=lambda p: (-p.confidence, p.utt_id, p.start, p.end))


def _match_flags(
    ranked: list[LocalizationProposal],
    gts: list[GroundTruthRegion],
    thr: float,
) -> list[bool]:
    """True-positive flag per ranked proposal under greedy 1:1 matching."""
    taken = [False] * len(gts)
    flags = []
    for p in ranked:
        best, best_v = -1, 0.0
        for j, g in enumerate(gts):
            if taken[j] or g.utt_id != p.utt_id:
                continue
            v = iou((p.start, p.end), (g.start, g.end))
            if v >= thr and v > best_v:
                best, best_v = j, v
        if best >= 0:
            taken[best] = True
        flags.append(best >= 0)
    return flags


def average_precision(proposals, gts, iou_threshold: float) -> float:
    """All-point interpolated AP; 0.0 when there are no ground-truth regions."""
    gts = list(gts)
    if not gts:
        return 0.0
    ranked = _ranked(proposals)
    if not ranked:
        return 0.0
    flags = np.asarray(_match_flags(ranked, gts, iou_threshold), dtype=np.float64)
    tp = np.cumsum(flags)
    if tp[-1] == 0:
        return 0.0
    recall = tp / len(gts)
    precision = tp / np.arange(1, flags.size + 1)
    # precision envelope over [0, 1] recall, summed over recall steps
    mprec = np.concatenate(([0.0], precision, [0.0]))
    mrec = np.concatenate(([0.0], recall, [1.0]))
    for i in range(mprec.size - 2, -1, -1):
        mprec[i] = max(mprec[i], mprec[i + 1])
    steps = np.flatnonzero(mrec[1:] != mrec[:-1]) + 1
    return float(np.sum((mrec[steps] - mrec[steps - 1]) * mprec[steps]))


def mean_ap(proposals, gts, thresholds=DEFAULT_IOU_THRESHOLDS) -> float:
    if not thresholds:
        raise ValueError("need at least one IoU threshold")
    return float(
        np.mean([average_precision(proposals, gts, t) for t in thresholds])
    )


def average_recall_at_k(proposals, gts, k: int) -> float:
    """Recall with at most k proposals per utterance, averaged over the IoU
    grid 0.5:0.05:0.95 and over utterances having ground-truth regions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    gts = list(gts)
    by_utt: dict[str, list[GroundTruthRegion]] = {}
    for g in gts:
        by_utt.setdefault(g.utt_id, []).append(g)
    if not by_utt:
        raise ValueError("no ground-truth regions")
    props_by_utt: dict[str, list[LocalizationProposal]] = {}
    for p in proposals:
        props_by_utt.setdefault(p.utt_id, []).append(p)
    per_utt = []
    for utt in sorted(by_utt):
        regions = by_utt[utt]
        top = _ranked(props_by_utt.get(utt, ()))[:k]
        recalls = [
            sum(_match_flags(top, regions, thr)) / len(regions)
            for thr in AR_IOU_GRID
        ]
        per_utt.append(sum(recalls) / len(recalls))
    return float(np.mean(per_utt))


def segments_to_proposals(
    seg: Segmentation,
    ss: SegmentScores,
    utt_id: str,
    merge_threshold: float | None = None,
) -> list[LocalizationProposal]:
    """One proposal per predicted segment, on the frame grid in seconds.

    With `merge_threshold`, maximal runs of adjacent segments scoring at or
    above it fuse into a single proposal carrying the max member confidence;
    segments below the threshold stay individual proposals.
    """
    if ss.segmentation != seg:
        raise ValueError("segment scores belong to a different segmentation")
    dur = seg.grid.frame_duration
    items = [
        (s.start * dur, s.end * dur, float(v))
        for s, v in zip(seg.segments, ss.scores)
    ]
    if merge_threshold is not None:
        merged = []
        run = None
        for start, end, conf in items:
            if conf >= merge_threshold:
                if run is None:
                    run = [start, end, conf]
                else:
                    run[1] = end
                    run[2] = max(run[2], conf)
            else:
                if run is not None:
                    merged.append(tuple(run))
                    run = None
                merged.append((start, end, conf))
        if run is not None:
            merged.append(tuple(run))
        items = merged
    return [LocalizationProposal(utt_id, a, b, c) for a, b, c in items]


def spoof_regions(labels_segmentation: Segmentation, utt_id: str) -> list[GroundTruthRegion]:
    """Ground-truth manipulation regions: the spoof-labeled segments, in seconds."""
    dur = labels_segmentation.grid.frame_duration
    return [
        GroundTruthRegion(utt_id, s.start * dur, s.end * dur)
        for s in labels_segmentation.segments
        if s.label == 1
    ]


def localization_report(
    proposals,
    gts,
    iou_thresholds=DEFAULT_IOU_THRESHOLDS,
    budgets=DEFAULT_RECALL_BUDGETS,
) -> dict:
    """AP per IoU threshold, mAP, and AR per proposal budget."""
    proposals = list(proposals)
    gts = list(gts)
    ap = {format(t, ".9g"): average_precision(proposals, gts, t) for t in iou_thresholds}
    report = {
        "ap": ap,
        "mean_ap": float(np.mean(list(ap.values()))),
        "ar": {},
        "n_proposals": len(proposals),
        "n_regions": len(gts),
    }
    if gts:
        report["ar"] = {
            str(k): average_recall_at_k(proposals, gts, k) for k in budgets
        }
    return report

"""Segment-score plumbing: aggregation, projection, and score-level fusion.

Score orientation is fixed corpus-wide: higher means more spoof-like.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import DEFAULT_BINS, ScoreKind, ScoreSequence, apply_threshold, fit_histogram_threshold
from .timeline import BoundarySequence, Segmentation

AGGREGATION_MODES = ("mean", "max", "min")


@dataclass(frozen=True, eq=False)
class SegmentScores:
    """One spoof score per segment of a segmentation (higher = more spoof)."""

    segmentation: Segmentation
    scores: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.scores, dtype=np.float64)
        if arr.ndim != 1 or arr.size != len(self.segmentation.segments):
            raise ValueError(
                f"{arr.size} scores for {len(self.segmentation.segments)} segments"
            )
        if not np.isfinite(arr).all():
            raise ValueError("segment scores must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "scores", arr)


def project_to_frames(ss: SegmentScores) -> ScoreSequence:
    """Give every frame the score of the segment containing it."""
    values = np.repeat(ss.scores, ss.segmentation.lengths())
    return ScoreSequence(values, ScoreKind.FRAME)


def aggregate_frames_to_segments(
    fs: ScoreSequence, seg: Segmentation, mode: str = "mean"
) -> SegmentScores:
    """Reduce frame scores over each segment (mean by default)."""
    if fs.kind is not ScoreKind.FRAME:
        raise ValueError(f"expected frame scores, got kind={fs.kind.value}")
    if fs.values.size != seg.grid.n_frames:
        raise ValueError(
            f"{fs.values.size} frame scores for a grid of {seg.grid.n_frames} frames"
        )
    if mode not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    starts = seg.starts()
    if mode == "mean":
        agg = np.add.reduceat(fs.values, starts) / seg.lengths()
    elif mode == "max":
        agg = np.maximum.reduceat(fs.values, starts)
    else:
        agg = np.minimum.reduceat(fs.values, starts)
    return SegmentScores(seg, agg)


def fuse(score_sets: list[ScoreSequence]) -> ScoreSequence:
    """Element-wise mean of same-shape score sequences from several systems."""
    if not score_sets:
        raise ValueError("nothing to fuse")
    kind = score_sets[0].kind
    n = score_sets[0].values.size
    for i, s in enumerate(score_sets):
        if s.kind is not kind:
            raise ValueError(f"system {i} has kind {s.kind.value}, expected {kind.value}")
        if s.values.size != n:
            raise ValueError(f"system {i} has {s.values.size} values, expected {n}")
    stacked = np.stack([s.values for s in score_sets])
    return ScoreSequence(stacked.mean(axis=0), kind)


def fuse_boundary_indicators(
    score_sets: list[ScoreSequence],
    m_bins: int = DEFAULT_BINS,
    binarize_first: bool = False,
) -> BoundarySequence:
    """Combine several boundary-score systems into one indicator sequence.

    Default order fuses the raw scores and thresholds once. With
    `binarize_first` each system is thresholded on its own histogram and the
    binary indicators are majority-voted (ties fire), for studying the
    alternative fusion order.
    """
    if binarize_first:
        fused = fuse(
            [
                ScoreSequence(
                    apply_threshold(s, fit_histogram_threshold(s, m_bins).tau_star)
                    .indicators.astype(np.float64),
                    ScoreKind.BOUNDARY,
                )
                for s in score_sets
            ]
        )
        return apply_threshold(fused, 0.5)
    fused = fuse(score_sets)
    return apply_threshold(fused, fit_histogram_threshold(fused, m_bins).tau_star)

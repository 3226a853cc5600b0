"""Binarization of continuous boundary scores.

Two modes: a fixed global threshold, and the utterance-adaptive histogram
procedure that places the threshold at the upper edge of the least populated
bin of the per-utterance score histogram.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .timeline import BoundarySequence, FrameGrid

DEFAULT_BINS = 20


class ScoreKind(str, enum.Enum):
    BOUNDARY = "boundary"  # one score per consecutive frame pair (length N-1)
    FRAME = "frame"        # one score per frame (length N)
    SEGMENT = "segment"    # one score per segment


@dataclass(frozen=True, eq=False)
class ScoreSequence:
    """A finite real-valued score vector tagged with what it scores."""

    values: np.ndarray = field(repr=False)
    kind: ScoreKind = ScoreKind.FRAME

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-d score vector, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("scores must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "kind", ScoreKind(self.kind))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class GlobalThresholdConfig:
    tau_g: float

    def __post_init__(self):
        if not math.isfinite(self.tau_g):
            raise ValueError("tau_g must be finite")


@dataclass(frozen=True, eq=False)
class HistogramThreshold:
    """Result of one adaptive fit: the histogram and the derived threshold.

    `argmin_bin` is 0-based, so `tau_star == edges[argmin_bin + 1]` whenever
    the fit is not degenerate. A fit is degenerate when all scores are equal;
    `tau_star` is then placed just above the common value so nothing fires.
    """

    m_bins: int
    counts: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    argmin_bin: int
    tau_star: float
    degenerate: bool

    def __post_init__(self):
        counts = _ro(np.asarray(self.counts, dtype=np.int64))
        edges = _ro(np.asarray(self.edges, dtype=np.float64))
        if counts.size != self.m_bins or edges.size != self.m_bins + 1:
            raise ValueError("counts/edges size inconsistent with m_bins")
        if not self.degenerate and np.any(np.diff(edges) < 0):
            raise ValueError("edges must be non-decreasing")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "edges", edges)


def _ro(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _require_boundary(scores: ScoreSequence):
    if scores.kind is not ScoreKind.BOUNDARY:
        raise ValueError(f"expected boundary scores, got kind={scores.kind.value}")


def apply_threshold(scores: ScoreSequence, tau: float) -> BoundarySequence:
    """b_t = 1 iff s_t >= tau (ties count as boundaries)."""
    _require_boundary(scores)
    grid = FrameGrid(scores.values.size + 1)
    return BoundarySequence(grid, (scores.values >= tau).astype(np.uint8))


def threshold_global(scores: ScoreSequence, cfg: GlobalThresholdConfig) -> BoundarySequence:
    return apply_threshold(scores, cfg.tau_g)


def fit_histogram_threshold(
    scores: ScoreSequence,
    m_bins: int = DEFAULT_BINS,
    bin_range: tuple[float, float] | None = None,
    tie_break: str = "lowest",
) -> HistogramThreshold:
    """Fit the utterance-adaptive histogram threshold.

    The score range (by default [min, max] of this utterance) is split into
    `m_bins` equal-width bins, half-open except the last, which is closed so
    the maximum is counted. The threshold is the upper edge of the least
    populated bin, searching only between the first and last non-empty bins
    so empty bins outside the data span can never win; ties go to the lowest
    bin (`tie_break="highest"` flips that, for sensitivity studies).

    Raises ValueError on an empty score sequence or m_bins < 2.
    """
    _require_boundary(scores)
    s = scores.values
    if s.size == 0:
        raise ValueError("empty score sequence")
    if m_bins < 2:
        raise ValueError(f"m_bins must be >= 2, got {m_bins}")
    if tie_break not in ("lowest", "highest"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    lo, hi = (float(s.min()), float(s.max())) if bin_range is None else map(float, bin_range)
    if not (lo < hi):
        # constant scores carry no transition evidence; threshold above max
        tau = math.nextafter(float(s.max()), math.inf)
        counts = np.zeros(m_bins, dtype=np.int64)
        counts[0] = s.size
        return HistogramThreshold(
            m_bins=m_bins,
            counts=counts,
            edges=np.full(m_bins + 1, lo),
            argmin_bin=0,
            tau_star=tau,
            degenerate=True,
        )
    step = (hi - lo) / m_bins
    edges = lo + step * np.arange(m_bins + 1)
    edges[m_bins] = hi
    bins = np.searchsorted(edges, s, side="right") - 1
    np.clip(bins, 0, m_bins - 1, out=bins)
    counts = np.bincount(bins, minlength=m_bins).astype(np.int64)
    nonzero = np.flatnonzero(counts)
    first, last = int(nonzero[0]), int(nonzero[-1])
    span = counts[first : last + 1]
    if tie_break == "lowest":
        argmin = first + int(np.argmin(span))
    else:
        argmin = last - int(np.argmin(span[::-1]))
    return HistogramThreshold(
        m_bins=m_bins,
        counts=counts,
        edges=edges,
        argmin_bin=argmin,
        tau_star=float(edges[argmin + 1]),
        degenerate=False,
    )


def threshold_adaptive(scores: ScoreSequence, m_bins: int = DEFAULT_BINS) -> BoundarySequence:
    """Binarize with the utterance-specific histogram threshold."""
    fit = fit_histogram_threshold(scores, m_bins)
    return apply_threshold(scores, fit.tau_star)

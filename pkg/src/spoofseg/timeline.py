"""Frame-grid data model: labels, segments, boundary indicators.

Everything downstream works on a fixed 20 ms frame grid. Frame indices are
the canonical representation; seconds only appear at IO boundaries, which
keeps segment tilings exact. All types are immutable after construction and
all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

FRAME_SECONDS = 0.02
BONAFIDE = 0
SPOOF = 1

_RESOLUTION_TOL = 1e-9


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d sequence, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FrameGrid:
    """A uniform grid of `n_frames` frames of `frame_duration` seconds.

    The base annotation grid always uses 20 ms frames; coarsened label
    sequences carry a grid whose duration is a multiple of 20 ms.
    """

    n_frames: int
    frame_duration: float = FRAME_SECONDS

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError(f"n_frames must be >= 1, got {self.n_frames}")
        if not (self.frame_duration > 0):
            raise ValueError("frame_duration must be positive")

    @property
    def duration_seconds(self) -> float:
        return self.n_frames * self.frame_duration


@dataclass(frozen=True, eq=False)
class FrameLabelSequence:
    """Per-frame bona fide (0) / spoof (1) labels on a frame grid."""

    grid: FrameGrid
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_array(self.labels, np.uint8)
        if not np.isin(arr, (BONAFIDE, SPOOF)).all():
            raise ValueError("labels must be 0 (bona fide) or 1 (spoof)")
        if arr.size != self.grid.n_frames:
            raise ValueError(
                f"{arr.size} labels for a grid of {self.grid.n_frames} frames"
            )
        object.__setattr__(self, "labels", arr)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "FrameLabelSequence":
        labels = list(labels)
        return cls(FrameGrid(len(labels)), labels)


class Segment(NamedTuple):
    start: int
    end: int  # exclusive
    label: int | None = None


@dataclass(frozen=True)
class Segmentation:
    """Ordered, gapless tiling of [0, n_frames) into segments.

    Labels are optional (candidate segmentations from detected boundaries
    are unlabeled). Adjacent equal labels are permitted on construction;
    `labels_to_segments` additionally guarantees maximality.
    """

    grid: FrameGrid
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(Segment(*s) for s in self.segments)
        if not segs:
            raise ValueError("segmentation needs at least one segment")
        if segs[0].start != 0:
            raise ValueError("first segment must start at frame 0")
        if segs[-1].end != self.grid.n_frames:
            raise ValueError("last segment must end at n_frames")
        for prev, cur in zip(segs, segs[1:]):
            if cur.start != prev.end:
                raise ValueError(f"gap or overlap at frame {cur.start}")
        for s in segs:
            if s.end <= s.start:
                raise ValueError(f"empty segment {s}")
            if s.label is not None and s.label not in (BONAFIDE, SPOOF):
                raise ValueError(f"bad segment label {s.label}")
        object.__setattr__(self, "segments", segs)

    @property
    def labeled(self) -> bool:
        return all(s.label is not None for s in self.segments)

    def starts(self) -> np.ndarray:
        return np.fromiter((s.start for s in self.segments), dtype=np.int64)

    def lengths(self) -> np.ndarray:
        return np.fromiter((s.end - s.start for s in self.segments), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class BoundarySequence:
    """Binary transition indicators between consecutive frames (length N-1)."""

    grid: FrameGrid
    indicators: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_array(self.indicators, np.uint8)
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("indicators must be 0/1")
        if arr.size != self.grid.n_frames - 1:
            raise ValueError(
                f"{arr.size} indicators for a grid of {self.grid.n_frames} frames"
            )
        object.__setattr__(self, "indicators", arr)


def labels_to_boundaries(labels: FrameLabelSequence) -> BoundarySequence:
    """Indicator t is 1 iff frames t and t+1 carry different labels."""
    lab = labels.labels
    return BoundarySequence(labels.grid, (lab[1:] != lab[:-1]).astype(np.uint8))


def labels_to_segments(labels: FrameLabelSequence) -> Segmentation:
    """Run-length encode labels into maximal same-label segments."""
    lab = labels.labels
    cuts = np.flatnonzero(lab[1:] != lab[:-1]) + 1
    bounds = np.concatenate(([0], cuts, [lab.size]))
    segs = [
        Segment(int(a), int(b), int(lab[a]))
        for a, b in zip(bounds[:-1], bounds[1:])
    ]
    return Segmentation(labels.grid, tuple(segs))


def segments_to_labels(seg: Segmentation) -> FrameLabelSequence:
    """Expand a fully labeled tiling back to per-frame labels."""
    if not seg.labeled:
        raise ValueError("all segments must be labeled")
    labels = np.repeat(
        np.fromiter((s.label for s in seg.segments), dtype=np.uint8),
        seg.lengths(),
    )
    return FrameLabelSequence(seg.grid, labels)


def boundaries_to_segments(b: BoundarySequence) -> Segmentation:
    """Unlabeled segmentation cut after every indicated frame pair."""
    cuts = np.flatnonzero(b.indicators) + 1
    bounds = np.concatenate(([0], cuts, [b.grid.n_frames]))
    segs = [Segment(int(a), int(b_)) for a, b_ in zip(bounds[:-1], bounds[1:])]
    return Segmentation(b.grid, tuple(segs))


def resolution_to_factor(resolution: float, base: float = FRAME_SECONDS) -> int:
    """Validate that `resolution` is a positive integer multiple of the base
    frame duration and return the multiple."""
    k = int(round(resolution / base))
    if k < 1 or abs(resolution - k * base) > _RESOLUTION_TOL:
        raise ValueError(
            f"resolution {resolution} s is not a positive multiple of {base} s"
        )
    return k


def unit_starts(n: int, k: int) -> np.ndarray:
    """Start indices of the ceil(n/k) coarse units covering [0, n)."""
    return np.arange(0, n, k, dtype=np.int64)


def coarsen_labels(labels: FrameLabelSequence, resolution: float) -> FrameLabelSequence:
    """Coarsen to `resolution` seconds with any-spoof aggregation.

    A coarse unit is spoof iff any constituent frame is spoof. The trailing
    unit may cover fewer than k frames; it is kept, not dropped, so total
    coverage is preserved.
    """
    k = resolution_to_factor(resolution, labels.grid.frame_duration)
    if k == 1:
        return labels
    lab = labels.labels
    starts = unit_starts(lab.size, k)
    coarse = np.maximum.reduceat(lab, starts)
    grid = FrameGrid(int(math.ceil(lab.size / k)), resolution)
    return FrameLabelSequence(grid, coarse)

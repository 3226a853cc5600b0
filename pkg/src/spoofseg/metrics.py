"""Detection metrics: EER at several granularities, P/R/F1, DET curves.

The EER engine sweeps every distinct score ascending (spoof iff score >= tau)
and linearly interpolates between the two sweep points bracketing the sign
change of FAR - FRR, which makes results deterministic for any input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import ScoreKind, ScoreSequence
from .scoring import AGGREGATION_MODES, aggregate_frames_to_segments
from .timeline import (
    FRAME_SECONDS,
    FrameLabelSequence,
    labels_to_segments,
    resolution_to_factor,
    unit_starts,
)

# evaluation resolutions in seconds; None means one unit per utterance
DEFAULT_RESOLUTIONS: tuple[float | None, ...] = (
    0.02, 0.04, 0.08, 0.16, 0.32, 0.64, None,
)


@dataclass(frozen=True)
class EerResult:
    eer: float
    threshold: float


@dataclass(frozen=True)
class UtteranceEerResult:
    """Mean of per-utterance EERs. Utterances lacking one class at the chosen
    granularity cannot define an EER; they are skipped and counted."""

    mean_eer: float
    n_used: int
    n_skipped: int


@dataclass(frozen=True)
class PrfResult:
    """Pooled frame precision/recall/F1 (spoof positive).

    `precision` is None when nothing was predicted spoof; `recall` is None
    when the corpus has no spoof frames; `f1` is None whenever either is.
    """

    precision: float | None
    recall: float | None
    f1: float | None
    threshold: float


@dataclass(frozen=True, eq=False)
class DetCurve:
    thresholds: np.ndarray = field(repr=False)
    far: np.ndarray = field(repr=False)
    miss: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        far = np.asarray(self.far, dtype=np.float64)
        miss = np.asarray(self.miss, dtype=np.float64)
        if not (t.size == far.size == miss.size):
            raise ValueError("mismatched curve arrays")
        if np.any(np.diff(far) > 0) or np.any(np.diff(miss) < 0):
            raise ValueError("DET curve must have non-increasing FAR and non-decreasing miss")
        for name, arr in (("far", far), ("miss", miss)):
            if arr.size and (arr.min() < 0 or arr.max() > 1):
                raise ValueError(f"{name} outside [0, 1]")
        for arr in (t, far, miss):
            arr.flags.writeable = False
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "far", far)
        object.__setattr__(self, "miss", miss)


@dataclass(frozen=True, eq=False)
class ScoredUtterance:
    """Ground-truth labels paired with per-frame prediction scores."""

    utt_id: str
    labels: FrameLabelSequence
    scores: ScoreSequence

    def __post_init__(self):
        if self.scores.kind is not ScoreKind.FRAME:
            raise ValueError(f"expected frame scores, got {self.scores.kind.value}")
        if self.scores.values.size != self.labels.grid.n_frames:
            raise ValueError(
                f"utterance {self.utt_id}: {self.scores.values.size} scores for "
                f"{self.labels.grid.n_frames} frames"
            )


@dataclass(frozen=True)
class ScoredCorpus:
    utterances: tuple[ScoredUtterance, ...]

    def __post_init__(self):
        utts = tuple(self.utterances)
        if not utts:
            raise ValueError("corpus must contain at least one utterance")
        ids = [u.utt_id for u in utts]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate utterance ids")
        # canonical order makes every pooled reduction reproducible
        object.__setattr__(
            self, "utterances", tuple(sorted(utts, key=lambda u: u.utt_id))
        )


def compute_eer(positives, negatives) -> EerResult:
    """EER of spoof-vs-bonafide score lists under the score >= tau rule."""
    pos = np.sort(np.asarray(positives, dtype=np.float64))
    neg = np.sort(np.asarray(negatives, dtype=np.float64))
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be non-empty")
    cands = np.unique(np.concatenate([pos, neg]))
    cands = np.append(cands, math.nextafter(float(cands[-1]), math.inf))
    far = (neg.size - np.searchsorted(neg, cands, side="left")) / neg.size
    frr = np.searchsorted(pos, cands, side="left") / pos.size
    d = far - frr
    # d starts at +1 (tau = global min) and ends at -1 (above global max)
    j = int(np.argmax(d <= 0.0))
    if d[j] == 0.0:
        return EerResult(float(far[j]), float(cands[j]))
    i = j - 1
    di, dj = float(d[i]), float(d[j])
    t = di / (di - dj)
    eer = float(far[i]) + t * (float(far[j]) - float(far[i]))
    thr = float(cands[i]) + t * (float(cands[j]) - float(cands[i]))
    return EerResult(eer, thr)


def _coarsen_scores(values: np.ndarray, starts: np.ndarray, n: int, mode: str) -> np.ndarray:
    if mode == "max":
        return np.maximum.reduceat(values, starts)
    if mode == "min":
        return np.minimum.reduceat(values, starts)
    counts = np.diff(np.append(starts, n))
    return np.add.reduceat(values, starts) / counts


def _pool_units(
    corpus: ScoredCorpus, resolution: float | None, aggregation: str
) -> tuple[np.ndarray, np.ndarray]:
    """Pooled (labels, scores) over the coarse units of all utterances."""
    if aggregation not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation mode {aggregation!r}")
    labs, scores = [], []
    for utt in corpus.utterances:
        n = utt.labels.grid.n_frames
        k = n if resolution is None else resolution_to_factor(resolution)
        if k == 1:
            labs.append(utt.labels.labels)
            scores.append(utt.scores.values)
            continue
        starts = unit_starts(n, k)
        labs.append(np.maximum.reduceat(utt.labels.labels, starts))
        scores.append(_coarsen_scores(utt.scores.values, starts, n, aggregation))
    lab = np.concatenate(labs)
    sc = np.concatenate(scores)
    return lab, sc


def frame_eer(
    corpus: ScoredCorpus,
    resolution: float | None = FRAME_SECONDS,
    aggregation: str = "max",
) -> EerResult:
    """Pooled EER over coarse units at `resolution` (None = per utterance).

    Labels coarsen with the any-spoof rule; scores with `aggregation`
    (max by default, keeping "any spoof evidence" aligned with
    "strongest spoof evidence").
    """
    lab, sc = _pool_units(corpus, resolution, aggregation)
    return compute_eer(sc[lab == 1], sc[lab == 0])


def _segment_pool(corpus: ScoredCorpus, aggregation: str) -> tuple[list[float], list[float]]:
    pos, neg = [], []
    for utt in corpus.utterances:
        seg = labels_to_segments(utt.labels)
        agg = aggregate_frames_to_segments(utt.scores, seg, aggregation)
        for s, v in zip(seg.segments, agg.scores):
            (pos if s.label == 1 else neg).append(float(v))
    return pos, neg


def segment_eer(corpus: ScoredCorpus, aggregation: str = "mean") -> EerResult:
    """Pooled EER over ground-truth segments, scored by aggregating frames."""
    pos, neg = _segment_pool(corpus, aggregation)
    return compute_eer(pos, neg)


def per_utterance_eer(
    corpus: ScoredCorpus,
    granularity: str = "frame",
    aggregation: str = "mean",
) -> UtteranceEerResult:
    """Mean of per-utterance EERs at frame or segment granularity."""
    if granularity not in ("frame", "segment"):
        raise ValueError(f"unknown granularity {granularity!r}")
    eers = []
    skipped = 0
    for utt in corpus.utterances:
        if granularity == "frame":
            lab = utt.labels.labels
            sc = utt.scores.values
            pos, neg = sc[lab == 1], sc[lab == 0]
        else:
            seg = labels_to_segments(utt.labels)
            agg = aggregate_frames_to_segments(utt.scores, seg, aggregation)
            lab = np.fromiter((s.label for s in seg.segments), dtype=np.uint8)
            pos, neg = agg.scores[lab == 1], agg.scores[lab == 0]
        if len(pos) == 0 or len(neg) == 0:
            skipped += 1
            continue
        eers.append(compute_eer(pos, neg).eer)
    if not eers:
        raise ValueError("every utterance lacks one class; per-utterance EER undefined")
    return UtteranceEerResult(float(np.mean(eers)), len(eers), skipped)


def precision_recall_f1(
    corpus: ScoredCorpus, threshold: float | None = None
) -> PrfResult:
    """Pooled frame P/R/F1 (spoof positive, predicted spoof iff score >= tau).

    With `threshold=None` the operating point is the frame-EER threshold.
    """
    if threshold is None:
        threshold = frame_eer(corpus).threshold
    lab, sc = _pool_units(corpus, FRAME_SECONDS, "max")
    pred = sc >= threshold
    truth = lab == 1
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return PrfResult(precision, recall, f1, float(threshold))


def det_curve(corpus: ScoredCorpus) -> DetCurve:
    """Miss rate vs false-alarm rate at every distinct pooled frame score,
    with sentinel endpoints spanning the full operating range."""
    lab, sc = _pool_units(corpus, FRAME_SECONDS, "max")
    pos = np.sort(sc[lab == 1])
    neg = np.sort(sc[lab == 0])
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be non-empty")
    cands = np.unique(np.concatenate([pos, neg]))
    thresholds = np.concatenate(([-np.inf], cands, [np.inf]))
    far = (neg.size - np.searchsorted(neg, thresholds, side="left")) / neg.size
    miss = np.searchsorted(pos, thresholds, side="left") / pos.size
    return DetCurve(thresholds, far, miss)


def _resolution_key(resolution: float | None) -> str:
    return "utterance" if resolution is None else format(resolution, ".9g")


def evaluate_corpus(
    corpus: ScoredCorpus,
    resolutions: tuple[float | None, ...] = DEFAULT_RESOLUTIONS,
    aggregation: str = "mean",
    coarse_aggregation: str = "max",
    threshold: float | None = None,
) -> dict:
    """Full detection report: multi-resolution F-EER, S-EER, U-EER, P/R/F1.

    `aggregation` drives frame->segment scoring, `coarse_aggregation` drives
    score pooling at coarse resolutions, `threshold` fixes the P/R/F1
    operating point (None = frame-EER threshold).
    """
    base = frame_eer(corpus, FRAME_SECONDS, coarse_aggregation)
    eers = {
        _resolution_key(r): frame_eer(corpus, r, coarse_aggregation).eer
        for r in resolutions
    }
    seg = segment_eer(corpus, aggregation)
    utt_frame = per_utterance_eer(corpus, "frame")
    utt_seg = per_utterance_eer(corpus, "segment", aggregation)
    prf = precision_recall_f1(corpus, threshold)
    return {
        "n_utterances": len(corpus.utterances),
        "frame_eer": eers,
        "frame_eer_threshold": base.threshold,
        "segment_eer": seg.eer,
        "segment_eer_threshold": seg.threshold,
        "utterance_eer": {
            "frame": {
                "mean_eer": utt_frame.mean_eer,
                "n_used": utt_frame.n_used,
                "n_skipped": utt_frame.n_skipped,
            },
            "segment": {
                "mean_eer": utt_seg.mean_eer,
                "n_used": utt_seg.n_used,
                "n_skipped": utt_seg.n_skipped,
            },
        },
        "precision": prf.precision,
        "recall": prf.recall,
        "f1": prf.f1,
        "prf_threshold": prf.threshold,
    }

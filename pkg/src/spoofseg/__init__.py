"""spoofseg: partial-spoof segmentation, scoring and evaluation toolkit.

Converts frame-level boundary scores into utterance segmentations via
adaptive histogram thresholding, handles segment score projection and
fusion, and implements the full evaluation protocol (multi-granularity
EER, DET curves, precision/recall/F1, temporal localization AP/AR) plus a
seeded synthetic scenario generator for end-to-end validation.

Score orientation is fixed throughout: higher scores mean more spoof-like.
"""

from .boundary import (
    DEFAULT_BINS,
    GlobalThresholdConfig,
    HistogramThreshold,
    ScoreKind,
    ScoreSequence,
    apply_threshold,
    fit_histogram_threshold,
    threshold_adaptive,
    threshold_global,
)
from .dsp import Waveform, extract_segment, mirror_indices, pre_emphasis, reflect_extend
from .localize import (
    GroundTruthRegion,
    LocalizationProposal,
    average_precision,
    average_recall_at_k,
    iou,
    localization_report,
    mean_ap,
    segments_to_proposals,
    spoof_regions,
)
from .metrics import (
    DEFAULT_RESOLUTIONS,
    DetCurve,
    EerResult,
    PrfResult,
    ScoredCorpus,
    ScoredUtterance,
    UtteranceEerResult,
    compute_eer,
    det_curve,
    evaluate_corpus,
    frame_eer,
    per_utterance_eer,
    precision_recall_f1,
    segment_eer,
)
from .scoring import (
    SegmentScores,
    aggregate_frames_to_segments,
    fuse,
    fuse_boundary_indicators,
    project_to_frames,
)
from .simulate import ScenarioConfig, SyntheticCorpus, SyntheticUtterance, as_scored_corpus, generate, run_pipeline
from .timeline import (
    BONAFIDE,
    FRAME_SECONDS,
    SPOOF,
    BoundarySequence,
    FrameGrid,
    FrameLabelSequence,
    Segment,
    Segmentation,
    boundaries_to_segments,
    coarsen_labels,
    labels_to_boundaries,
    labels_to_segments,
    segments_to_labels,
)

__version__ = "0.1.0"

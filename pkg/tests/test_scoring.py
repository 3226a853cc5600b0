import numpy as np
import pytest

from spoofseg.boundary import ScoreKind, ScoreSequence
from spoofseg.scoring import (
    SegmentScores,
    aggregate_frames_to_segments,
    fuse,
    fuse_boundary_indicators,
    project_to_frames,
)
from spoofseg.timeline import FrameGrid, Segment, Segmentation


def seg2(n=3):
    return Segmentation(FrameGrid(n), (Segment(0, 2), Segment(2, n)))


def frames(values):
    return ScoreSequence(values, ScoreKind.FRAME)


def test_project_examples():
    ss = SegmentScores(seg2(), [0.1, 0.9])
    assert project_to_frames(ss).values.tolist() == [0.1, 0.1, 0.9]
    single = Segmentation(FrameGrid(4), (Segment(0, 4),))
    assert project_to_frames(SegmentScores(single, [0.3])).values.tolist() == [0.3] * 4


def test_aggregate_examples():
    fs = frames([0.2, 0.4, 1.0])
    mean = aggregate_frames_to_segments(fs, seg2(), "mean").scores
    np.testing.assert_allclose(mean, [0.3, 1.0], atol=1e-12)
    assert aggregate_frames_to_segments(fs, seg2(), "max").scores.tolist() == [0.4, 1.0]
    assert aggregate_frames_to_segments(fs, seg2(), "min").scores.tolist() == [0.2, 1.0]


def test_aggregate_validation():
    with pytest.raises(ValueError, match="frame scores"):
        aggregate_frames_to_segments(ScoreSequence([0.1], ScoreKind.SEGMENT), seg2())
    with pytest.raises(ValueError, match="grid"):
        aggregate_frames_to_segments(frames([0.1, 0.2]), seg2())
    with pytest.raises(ValueError, match="mode"):
        aggregate_frames_to_segments(frames([0.1, 0.2, 0.3]), seg2(), "median")


@pytest.mark.property
def test_project_is_piecewise_constant_and_mean_round_trips():
    rng = np.random.default_rng(41)
    for _ in range(200):
        n = int(rng.integers(1, 120))
        cuts = np.unique(rng.integers(1, n, size=int(rng.integers(0, 6)))) if n > 1 else []
        bounds = [0, *cuts, n]
        seg = Segmentation(
            FrameGrid(n),
            tuple(Segment(a, b) for a, b in zip(bounds, bounds[1:])),
        )
        scores = rng.normal(0, 1, len(seg.segments))
        proj = project_to_frames(SegmentScores(seg, scores))
        for s, v in zip(seg.segments, scores):
            assert np.all(proj.values[s.start : s.end] == v)
        back = aggregate_frames_to_segments(proj, seg, "mean")
        np.testing.assert_allclose(back.scores, scores, atol=1e-12)


def test_fuse_examples():
    x = frames([0.1, 0.7])
    fused = fuse([x])
    assert np.array_equal(fused.values, x.values)
    assert fuse([frames([0, 1]), frames([1, 0])]).values.tolist() == [0.5, 0.5]


def test_fuse_errors():
    with pytest.raises(ValueError, match="fuse"):
        fuse([])
    with pytest.raises(ValueError, match="kind"):
        fuse([frames([0.1]), ScoreSequence([0.1], ScoreKind.BOUNDARY)])
    with pytest.raises(ValueError, match="values"):
        fuse([frames([0.1]), frames([0.1, 0.2])])


@pytest.mark.property
def test_fuse_permutation_invariance_and_idempotence():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(1, 50))
        systems = [frames(rng.normal(0, 1, n)) for _ in range(int(rng.integers(2, 5)))]
        a = fuse(systems).values
        order = rng.permutation(len(systems))
        b = fuse([systems[i] for i in order]).values
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
        same = fuse([systems[0], systems[0]]).values
        assert np.array_equal(same, systems[0].values)


def test_fuse_boundary_indicators_orders():
    truth = np.array([0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1], dtype=float)
    rng = np.random.default_rng(43)
    systems = [
        ScoreSequence(truth + rng.normal(0, 0.05, truth.size), ScoreKind.BOUNDARY)
        for _ in range(3)
    ]
    pre = fuse_boundary_indicators(systems, m_bins=8)
    post = fuse_boundary_indicators(systems, m_bins=8, binarize_first=True)
    assert pre.indicators.tolist() == truth.astype(int).tolist()
    assert post.indicators.tolist() == truth.astype(int).tolist()

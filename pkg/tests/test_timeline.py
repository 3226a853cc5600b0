import numpy as np
import pytest

from spoofseg.timeline import (
    BoundarySequence,
    FrameGrid,
    FrameLabelSequence,
    Segment,
    Segmentation,
    boundaries_to_segments,
    coarsen_labels,
    labels_to_boundaries,
    labels_to_segments,
    resolution_to_factor,
    segments_to_labels,
)

from oracles import coarsen_labels_oracle


def seq(labels):
    return FrameLabelSequence.from_labels(labels)


def test_labels_to_boundaries_examples():
    assert labels_to_boundaries(seq([0, 0, 1, 1, 0])).indicators.tolist() == [0, 1, 0, 1]
    assert labels_to_boundaries(seq([0, 0, 0])).indicators.tolist() == [0, 0]
    assert labels_to_boundaries(seq([1])).indicators.tolist() == []


def test_labels_to_segments_examples():
    assert labels_to_segments(seq([0, 0, 1, 1, 0])).segments == (
        Segment(0, 2, 0),
        Segment(2, 4, 1),
        Segment(4, 5, 0),
    )
    assert labels_to_segments(seq([1])).segments == (Segment(0, 1, 1),)


def test_segments_to_labels_examples():
    s = Segmentation(FrameGrid(3), (Segment(0, 2, 0), Segment(2, 3, 1)))
    assert segments_to_labels(s).labels.tolist() == [0, 0, 1]
    s = Segmentation(FrameGrid(1), (Segment(0, 1, 1),))
    assert segments_to_labels(s).labels.tolist() == [1]


def test_segments_to_labels_requires_labels():
    s = Segmentation(FrameGrid(3), (Segment(0, 2), Segment(2, 3, 1)))
    with pytest.raises(ValueError, match="labeled"):
        segments_to_labels(s)


def test_segments_to_labels_accepts_non_maximal_tilings():
    # split runs are legal input; expansion still reproduces the labels
    s = Segmentation(FrameGrid(4), (Segment(0, 2, 1), Segment(2, 4, 1)))
    assert segments_to_labels(s).labels.tolist() == [1, 1, 1, 1]


def test_boundaries_to_segments_examples():
    b = BoundarySequence(FrameGrid(5), [0, 1, 0, 1])
    assert [(s.start, s.end) for s in boundaries_to_segments(b).segments] == [
        (0, 2), (2, 4), (4, 5),
    ]
    b = BoundarySequence(FrameGrid(4), [0, 0, 0])
    assert [(s.start, s.end) for s in boundaries_to_segments(b).segments] == [(0, 4)]


@pytest.mark.property
def test_boundaries_against_pairwise_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        labels = rng.integers(0, 2, int(rng.integers(1, 60))).tolist()
        got = labels_to_boundaries(seq(labels)).indicators.tolist()
        want = [1 if a != b else 0 for a, b in zip(labels, labels[1:])]
        assert got == want


@pytest.mark.property
def test_round_trip_identity():
    rng = np.random.default_rng(12)
    for _ in range(200):
        labels = rng.integers(0, 2, int(rng.integers(1, 80)))
        segs = labels_to_segments(FrameLabelSequence(FrameGrid(labels.size), labels))
        # maximality: adjacent labels differ
        for a, b in zip(segs.segments, segs.segments[1:]):
            assert a.label != b.label
        back = segments_to_labels(segs)
        assert np.array_equal(back.labels, labels)


@pytest.mark.property
def test_boundary_count_and_cut_points_match_segments():
    rng = np.random.default_rng(13)
    for _ in range(200):
        labels = seq(rng.integers(0, 2, int(rng.integers(1, 120))).tolist())
        b = labels_to_boundaries(labels)
        segs = labels_to_segments(labels)
        assert int(b.indicators.sum()) == len(segs.segments) - 1
        rebuilt = boundaries_to_segments(b)
        assert [s.start for s in rebuilt.segments] == [s.start for s in segs.segments]


@pytest.mark.property
def test_boundaries_to_segments_consistency_oracle():
    # any labeling consistent with the segmentation reproduces the indicators
    rng = np.random.default_rng(14)
    for _ in range(200):
        n = int(rng.integers(2, 100))
        b = BoundarySequence(FrameGrid(n), rng.integers(0, 2, n - 1))
        segs = boundaries_to_segments(b)
        first = int(rng.integers(0, 2))
        labeled = Segmentation(
            segs.grid,
            tuple(
                Segment(s.start, s.end, (first + i) % 2)
                for i, s in enumerate(segs.segments)
            ),
        )
        again = labels_to_boundaries(segments_to_labels(labeled))
        assert np.array_equal(again.indicators, b.indicators)


def test_coarsen_examples():
    assert coarsen_labels(seq([0, 1, 0, 0]), 0.04).labels.tolist() == [1, 0]
    x = seq([0, 1, 1, 0, 1])
    assert coarsen_labels(x, 0.02) is x


@pytest.mark.parametrize("resolution", [0.02, 0.04, 0.08, 0.16, 0.32, 0.64])
def test_protocol_resolutions_accepted(resolution):
    out = coarsen_labels(seq([0, 1] * 40), resolution)
    k = resolution_to_factor(resolution)
    assert out.grid.n_frames == -(-80 // k)


@pytest.mark.parametrize("resolution", [0.03, 0.05, -0.02, 0.0])
def test_bad_resolutions_rejected(resolution):
    with pytest.raises(ValueError):
        coarsen_labels(seq([0, 1, 0]), resolution)


def test_trailing_partial_window_kept():
    out = coarsen_labels(seq([0, 0, 0, 0, 1]), 0.04)
    assert out.labels.tolist() == [0, 0, 1]
    assert out.grid.n_frames == 3
    assert out.grid.frame_duration == 0.04


@pytest.mark.property
def test_coarsen_matches_scan_oracle():
    rng = np.random.default_rng(15)
    for _ in range(200):
        labels = rng.integers(0, 2, int(rng.integers(1, 200))).tolist()
        k = int(rng.integers(1, 9))
        got = coarsen_labels(seq(labels), k * 0.02).labels.tolist()
        assert got == coarsen_labels_oracle(labels, k)
        # a coarse unit is bona fide iff every constituent frame is
        for i, v in enumerate(got):
            unit = labels[i * k : (i + 1) * k]
            assert (v == 0) == all(u == 0 for u in unit)


def test_grid_and_type_validation():
    with pytest.raises(ValueError):
        FrameGrid(0)
    with pytest.raises(ValueError):
        FrameLabelSequence(FrameGrid(3), [0, 1])
    with pytest.raises(ValueError):
        FrameLabelSequence(FrameGrid(2), [0, 2])
    with pytest.raises(ValueError):
        BoundarySequence(FrameGrid(3), [0, 1, 1])


def test_segmentation_tiling_validation():
    with pytest.raises(ValueError, match="start at frame 0"):
        Segmentation(FrameGrid(3), (Segment(1, 3),))
    with pytest.raises(ValueError, match="end at n_frames"):
        Segmentation(FrameGrid(3), (Segment(0, 2),))
    with pytest.raises(ValueError, match="gap or overlap"):
        Segmentation(FrameGrid(4), (Segment(0, 2), Segment(3, 4)))
    with pytest.raises(ValueError, match="empty segment"):
        Segmentation(FrameGrid(2), (Segment(0, 2), Segment(2, 2)))

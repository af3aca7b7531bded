import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topovox import evaluation as ev
from topovox import raster


# ---------------------------------------------------------------------------
# mcc formula
# ---------------------------------------------------------------------------

def test_mcc_exact_third():
    assert ev.mcc(2, 1, 1, 2) == pytest.approx(1.0 / 3.0)


def test_mcc_perfect():
    assert ev.mcc(10, 0, 0, 90) == pytest.approx(1.0)


def test_mcc_total_disagreement():
    assert ev.mcc(0, 5, 5, 0) == pytest.approx(-1.0)


def test_mcc_zero_denominator_convention():
    assert ev.mcc(0, 0, 5, 5) == 0.0
    assert ev.mcc(0, 0, 0, 0) == 0.0


def test_mcc_negative_counts_rejected():
    with pytest.raises(ValueError):
        ev.mcc(-1, 0, 0, 0)


@settings(max_examples=200, deadline=None)
@given(
    tp=st.integers(0, 10_000), fp=st.integers(0, 10_000),
    fn=st.integers(0, 10_000), tn=st.integers(0, 10_000),
)
def test_mcc_bounded_and_antisymmetric(tp, fp, fn, tn):
    v = ev.mcc(tp, fp, fn, tn)
    assert -1.0 <= v <= 1.0
    swapped = ev.mcc(fp, tp, tn, fn)
    assert v == pytest.approx(-swapped, abs=1e-12)


# ---------------------------------------------------------------------------
# match_regions
# ---------------------------------------------------------------------------

def grid(rows):
    # rows given y-down for readability; stored x-first
    return np.asarray(rows).T[:, ::-1]


def test_match_identity():
    img = grid([[1, 1, 2, 2], [1, 1, 2, 2], [0, 0, 0, 0]])
    m = ev.match_regions(img, img)
    assert m == {1: 1, 2: 2}


def test_match_majority_overlap():
    seg = grid([[5, 5, 5, 5, 5]])
    gt = grid([[1, 1, 1, 2, 2]])
    assert ev.match_regions(seg, gt) == {5: 1}


def test_match_tie_prefers_smaller_gt_label():
    seg = grid([[7, 7, 7, 7]])
    gt = grid([[2, 2, 1, 1]])
    assert ev.match_regions(seg, gt) == {7: 1}


def test_match_background_only_is_none():
    seg = grid([[3, 3, 0, 0]])
    gt = grid([[0, 0, 1, 1]])
    assert ev.match_regions(seg, gt) == {3: None}


def test_match_dimension_mismatch():
    with pytest.raises(ValueError):
        ev.match_regions(np.zeros((2, 2), int), np.zeros((3, 2), int))


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_perfect_segmentation_scores_one():
    img = grid([[1, 1, 2, 2], [1, 1, 2, 2], [0, 0, 3, 3]])
    rep = ev.evaluate(img, img)
    assert all(s.mcc == pytest.approx(1.0) for s in rep.scores)
    assert rep.aggregate == pytest.approx(1.0)


def test_counts_sum_to_pixels():
    rng = np.random.default_rng(81)
    seg = rng.integers(0, 4, size=(20, 30))
    gt = rng.integers(0, 4, size=(20, 30))
    rep = ev.evaluate(seg, gt)
    for s in rep.scores:
        assert s.tp + s.fp + s.fn + s.tn == seg.size


def test_label_permutation_invariant():
    # overlap-tie-free images: shifted strips of distinct widths
    seg = np.zeros((15, 15), dtype=int)
    gt = np.zeros((15, 15), dtype=int)
    for k, (a, b) in enumerate(((0, 3), (3, 7), (7, 12), (12, 15)), start=1):
        seg[a:b, :] = k
    for k, (a, b) in enumerate(((0, 4), (4, 8), (8, 13), (13, 15)), start=1):
        gt[a:b, :] = k
    base = ev.evaluate(seg, gt)
    # apply the same relabeling to both images
    perm = {0: 0, 1: 3, 2: 4, 3: 1, 4: 2}
    seg2 = np.vectorize(perm.get)(seg)
    gt2 = np.vectorize(perm.get)(gt)
    other = ev.evaluate(seg2, gt2)
    assert base.aggregate == pytest.approx(other.aggregate)
    assert sorted(s.mcc for s in base.scores) == pytest.approx(
        sorted(s.mcc for s in other.scores)
    )


def test_unmatched_segment_counts_all_fp():
    seg = grid([[1, 1, 0, 0, 0, 0]])
    gt = grid([[0, 0, 0, 0, 2, 2]])
    rep = ev.evaluate(seg, gt)
    s = rep.scores[0]
    assert s.gt_label is None and s.tp == 0 and s.fp == 2 and s.mcc == 0.0


def test_mean_vs_pixel_weighted_aggregation():
    seg = grid([[1, 1, 1, 1, 2, 0]])
    gt = grid([[1, 1, 1, 1, 2, 2]])
    w = ev.evaluate(seg, gt, aggregation="pixel_weighted")
    m = ev.evaluate(seg, gt, aggregation="mean")
    assert w.aggregate != m.aggregate  # small region weighs differently
    with pytest.raises(ValueError):
        ev.evaluate(seg, gt, aggregation="median")


# ---------------------------------------------------------------------------
# raster round trip
# ---------------------------------------------------------------------------

def test_label_image_roundtrip(tmp_path):
    rng = np.random.default_rng(83)
    labels = rng.integers(0, 7, size=(23, 17))
    p = tmp_path / "labels.png"
    raster.write_label_image(labels, p)
    back = raster.read_label_image(p)
    assert np.array_equal(back, labels)


def test_label_image_rejects_out_of_range(tmp_path):
    with pytest.raises(ValueError):
        raster.write_label_image(np.full((4, 4), 300), tmp_path / "x.png")


def test_occupancy_raster_values():
    free = np.array([[True, False], [False, True]])
    img = raster.occupancy_to_raster(free)
    assert img[0, 0] == 255 and img[0, 1] == 0


def test_raster_bytes_deterministic(tmp_path):
    labels = np.arange(64).reshape(8, 8) % 5
    p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
    raster.write_label_image(labels, p1)
    raster.write_label_image(labels, p2)
    assert p1.read_bytes() == p2.read_bytes()

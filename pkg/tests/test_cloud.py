import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topovox import cloud as tc
from topovox.errors import CloudParseError, EmptyCloudError


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------

def brute_force_single_linkage(pts, link_dist):
    """Naive O(n^2) connected components under dist <= link_dist."""
    n = len(pts)
    label = list(range(n))

    def find(a):
        while label[a] != a:
            label[a] = label[label[a]]
            a = label[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(pts[i] - pts[j]) <= link_dist:
                ra, rb = find(i), find(j)
                if ra != rb:
                    label[rb] = ra
    return np.array([find(i) for i in range(n)])


def brute_force_cell_buckets(pts, cell, anchor):
    buckets = {}
    for p in pts:
        key = tuple(int(np.floor((p[k] - anchor[k]) / cell)) for k in range(3))
        buckets.setdefault(key, []).append(p)
    return buckets


# ---------------------------------------------------------------------------
# PointCloud container
# ---------------------------------------------------------------------------

def test_bounds_cached():
    c = tc.PointCloud(np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]))
    lo, hi = c.bounds
    assert np.array_equal(lo, [0, 0, 0])
    assert np.array_equal(hi, [1, 2, 3])


def test_nonfinite_rejected_by_container():
    with pytest.raises(ValueError):
        tc.PointCloud(np.array([[0.0, 0.0, np.nan]]))


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def test_load_xyz_two_points(tmp_path):
    p = tmp_path / "a.xyz"
    p.write_text("0 0 0\n1 2 3\n")
    res = tc.load_cloud(p, "xyz_text")
    assert len(res.cloud) == 2
    lo, hi = res.cloud.bounds
    assert np.array_equal(lo, [0, 0, 0])
    assert np.array_equal(hi, [1, 2, 3])
    assert res.rejected == 0


def test_load_ply_ascii_one_vertex(tmp_path):
    p = tmp_path / "a.ply"
    p.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n0.5 0.5 0.5\n"
    )
    res = tc.load_cloud(p, "ply_ascii")
    assert len(res.cloud) == 1
    assert np.allclose(res.cloud.points[0], [0.5, 0.5, 0.5])


def test_load_counts_nan_rejections(tmp_path):
    p = tmp_path / "a.xyz"
    lines = [f"{i} {i} {i}" for i in range(10)] + ["1 2 nan"]
    p.write_text("\n".join(lines) + "\n")
    res = tc.load_cloud(p, "xyz_text")
    assert len(res.cloud) == 10
    assert res.rejected == 1


def test_load_discards_extra_attributes(tmp_path):
    p = tmp_path / "a.ply"
    p.write_text(
        "ply\nformat ascii 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n1 2 3 255 0 0\n4 5 6 0 255 0\n"
    )
    res = tc.load_cloud(p, "ply_ascii")
    assert res.cloud.points.shape == (2, 3)
    assert np.allclose(res.cloud.points[1], [4, 5, 6])


def test_malformed_header_reports_offset(tmp_path):
    p = tmp_path / "a.ply"
    p.write_text("not a ply file at all\n")
    with pytest.raises(CloudParseError) as exc:
        tc.load_cloud(p, "ply_ascii")
    assert exc.value.offset is not None


def test_zero_valid_points_is_error(tmp_path):
    p = tmp_path / "a.xyz"
    p.write_text("nan nan nan\n")
    with pytest.raises(EmptyCloudError):
        tc.load_cloud(p, "xyz_text")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        tc.load_cloud(tmp_path / "nope.xyz", "xyz_text")


def test_format_inference_and_binary_sniff(tmp_path):
    c = tc.PointCloud(np.array([[0.25, 0.5, 0.75], [1.0, 2.0, 3.0]]))
    p1 = tmp_path / "a.ply"
    tc.write_cloud(c, p1, "ply_binary_le")
    res = tc.load_cloud(p1)  # no format given
    assert np.allclose(res.cloud.points, c.points)
    p2 = tmp_path / "b.pcd"
    tc.write_cloud(c, p2, "pcd_ascii")
    assert len(tc.load_cloud(p2).cloud) == 2


# ---------------------------------------------------------------------------
# round trips
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("format", ["xyz_text", "ply_ascii", "pcd_ascii"])
def test_ascii_roundtrip_exact_at_declared_precision(tmp_path, format):
    rng = np.random.default_rng(7)
    pts = np.round(rng.uniform(-5, 5, size=(37, 3)), 6)
    c = tc.PointCloud(pts)
    p = tmp_path / "rt"
    tc.write_cloud(c, p, format, decimals=6)
    loaded = tc.load_cloud(p, format).cloud
    # written at 6 decimals from 6-decimal data: values survive exactly
    assert np.array_equal(loaded.points, c.points)


def test_binary_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(8)
    c = tc.PointCloud(rng.uniform(-5, 5, size=(23, 3)))
    p = tmp_path / "rt.ply"
    tc.write_cloud(c, p, "ply_binary_le")
    loaded = tc.load_cloud(p, "ply_binary_le").cloud
    assert np.array_equal(loaded.points, c.points)


# ---------------------------------------------------------------------------
# voxel_downsample
# ---------------------------------------------------------------------------

def test_downsample_merges_close_points_to_midpoint():
    c = tc.PointCloud(np.array([[0.0, 0.0, 0.0], [0.01, 0.0, 0.0]]))
    out = tc.voxel_downsample(c, 0.05)
    assert len(out) == 1
    assert np.allclose(out.points[0], [0.005, 0.0, 0.0])


def test_downsample_keeps_distant_points():
    c = tc.PointCloud(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    out = tc.voxel_downsample(c, 0.05)
    assert len(out) == 2


def test_downsample_against_bucket_oracle():
    rng = np.random.default_rng(42)
    pts = rng.uniform(0, 1, size=(1000, 3))
    c = tc.PointCloud(pts)
    out = tc.voxel_downsample(c, 0.05)
    assert len(out) <= 20 ** 3
    buckets = brute_force_cell_buckets(pts, 0.05, c.bounds[0])
    assert len(out) == len(buckets)
    expected = {k: np.mean(v, axis=0) for k, v in buckets.items()}
    got = {
        tuple(int(np.floor((p[k] - c.bounds[0][k]) / 0.05)) for k in range(3)): p
        for p in out.points
    }
    assert set(got) == set(expected)
    for k in expected:
        assert np.allclose(got[k], expected[k])


def test_downsample_idempotent_with_fixed_anchor():
    rng = np.random.default_rng(3)
    c = tc.PointCloud(rng.uniform(0, 2, size=(500, 3)))
    anchor = c.bounds[0]
    once = tc.voxel_downsample(c, 0.1, anchor=anchor)
    twice = tc.voxel_downsample(once, 0.1, anchor=anchor)
    assert np.array_equal(once.points, twice.points)


def test_downsample_order_invariant():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(200, 3))
    a = tc.voxel_downsample(tc.PointCloud(pts), 0.07)
    b = tc.voxel_downsample(tc.PointCloud(pts[::-1].copy()), 0.07)
    assert np.allclose(a.points, b.points)


def test_downsample_rejects_bad_cell():
    c = tc.PointCloud(np.array([[0.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        tc.voxel_downsample(c, 0.0)


# ---------------------------------------------------------------------------
# denoise_clusters
# ---------------------------------------------------------------------------

def _blob(rng, center, n, radius=0.05):
    return center + rng.uniform(-radius, radius, size=(n, 3))


def test_denoise_keeps_single_large_cluster():
    rng = np.random.default_rng(11)
    pts = _blob(rng, np.zeros(3), 150, radius=0.025)
    out = tc.denoise_clusters(tc.PointCloud(pts), link_dist=0.20, min_points=100)
    assert len(out) == 150


def test_denoise_removes_strays():
    rng = np.random.default_rng(12)
    blob = _blob(rng, np.zeros(3), 150, radius=0.025)
    strays = _blob(rng, np.array([2.0, 2.0, 2.0]), 5, radius=0.01)
    pts = np.vstack([blob, strays])
    out = tc.denoise_clusters(tc.PointCloud(pts), link_dist=0.20, min_points=100)
    assert len(out) == 150
    assert out.points[:, 0].max() < 1.0


def test_denoise_equals_bruteforce_oracle():
    rng = np.random.default_rng(13)
    pts = np.vstack(
        [
            _blob(rng, np.zeros(3), 60, radius=0.3),
            _blob(rng, np.array([5.0, 0, 0]), 25, radius=0.2),
            _blob(rng, np.array([0, 5.0, 0]), 8, radius=0.1),
            rng.uniform(-10, 10, size=(40, 3)),
        ]
    )
    link, min_pts = 0.5, 20
    labels = brute_force_single_linkage(pts, link)
    sizes = {}
    for l in labels:
        sizes[l] = sizes.get(l, 0) + 1
    expected = pts[np.array([sizes[l] >= min_pts for l in labels])]
    out = tc.denoise_clusters(tc.PointCloud(pts), link_dist=link, min_points=min_pts)
    assert np.array_equal(out.points, expected)


def test_denoise_output_subset_of_input():
    rng = np.random.default_rng(14)
    pts = rng.uniform(0, 1, size=(300, 3))
    out = tc.denoise_clusters(tc.PointCloud(pts), link_dist=0.05, min_points=3)
    in_set = {tuple(p) for p in pts}
    assert all(tuple(p) in in_set for p in out.points)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=60),
    link=st.floats(min_value=0.05, max_value=1.0),
    min_pts=st.integers(min_value=1, max_value=10),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_denoise_matches_oracle_property(n, link, min_pts, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 2, size=(n, 3))
    labels = brute_force_single_linkage(pts, link)
    counts = np.bincount(labels)
    expected = pts[counts[labels] >= min_pts]
    out = tc.denoise_clusters(tc.PointCloud(pts), link_dist=link, min_points=min_pts)
    assert np.array_equal(out.points, expected)


def test_denoise_validates_args():
    c = tc.PointCloud(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        tc.denoise_clusters(c, link_dist=0)
    with pytest.raises(ValueError):
        tc.denoise_clusters(c, min_points=0)

import numpy as np
import pytest

from topovox import columns as tcol
from topovox import passages as tp
from topovox import volumes as tvol


def field_from_tuples(tuples, dims=(64, 64, 64), voxel=0.1, floor=0):
    cols = np.array(tuples, dtype=tcol.COLUMN_DTYPE)
    order = np.lexsort((cols["z1"], cols["iy"], cols["ix"]))
    return tcol.ColumnField(
        columns=cols[order],
        origin=np.zeros(3),
        voxel=voxel,
        dims=dims,
        floor_z_index=floor,
    )


def brute_force_point_clusters(points, d_th):
    """Union-find over the strict < d_th relation."""
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(points[i] - points[j]) < d_th:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[rb] = ra
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return {frozenset(g) for g in groups.values()}


# ---------------------------------------------------------------------------
# cluster_contact_points
# ---------------------------------------------------------------------------

def test_one_quad_corners_single_cluster():
    voxel = 0.1
    pts = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]]) * voxel
    clusters = tp.cluster_contact_points(pts, 1.5 * voxel)
    assert len(clusters) == 1


def test_two_distant_quads_two_clusters():
    voxel = 0.1
    quad = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]])
    pts = np.vstack([quad, quad + [0, 10, 0]]) * voxel
    clusters = tp.cluster_contact_points(pts, 1.5 * voxel)
    assert len(clusters) == 2


def test_cluster_matches_bruteforce_random():
    rng = np.random.default_rng(51)
    for _ in range(10):
        pts = rng.uniform(0, 3, size=(int(rng.integers(2, 100)), 3))
        d_th = float(rng.uniform(0.2, 1.0))
        got = {frozenset(int(i) for i in c) for c in tp.cluster_contact_points(pts, d_th)}
        assert got == brute_force_point_clusters(pts, d_th)


def test_cluster_strict_inequality():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    assert len(tp.cluster_contact_points(pts, 1.0)) == 2  # dist == d_th: separate
    assert len(tp.cluster_contact_points(pts, 1.0 + 1e-9)) == 1


def test_cluster_order_independent():
    rng = np.random.default_rng(52)
    pts = rng.uniform(0, 2, size=(60, 3))
    a = tp.cluster_contact_points(pts, 0.5)
    perm = rng.permutation(60)
    b = tp.cluster_contact_points(pts[perm], 0.5)
    sets_a = {frozenset(map(tuple, pts[c])) for c in a}
    sets_b = {frozenset(map(tuple, pts[perm][c])) for c in b}
    assert sets_a == sets_b


# ---------------------------------------------------------------------------
# generate_passages
# ---------------------------------------------------------------------------

def test_two_single_column_volumes_mesh():
    # overlap layers 2..4 -> 3 vertical quads, 8 distinct corners
    f = field_from_tuples([(0, 0, 2, 4), (1, 0, 2, 4)])
    ids = np.array([0, 1])
    edges = tp.generate_passages(f, ids, d_th=1.5 * f.voxel)
    assert len(edges) == 1
    e = edges[0]
    assert e.pair == (0, 1)
    assert len(e.quads) == 3
    assert len(e.points) == 8
    assert (e.points[:, 0] == 1).all()  # all corners on the shared x-plane


def test_partial_overlap_only_shared_layers():
    f = field_from_tuples([(0, 0, 0, 10), (1, 0, 5, 20)])
    edges = tp.generate_passages(f, np.array([0, 1]), d_th=0.15)
    assert len(edges) == 1
    assert len(edges[0].quads) == 6  # layers 5..10


def test_no_z_overlap_no_edge():
    f = field_from_tuples([(0, 0, 0, 4), (1, 0, 10, 20)])
    assert tp.generate_passages(f, np.array([0, 1]), d_th=0.15) == []


def test_no_adjacency_no_edge():
    f = field_from_tuples([(0, 0, 0, 4), (5, 5, 0, 4)])
    assert tp.generate_passages(f, np.array([0, 1]), d_th=0.15) == []


def test_two_separated_openings_two_edges():
    # wall of volume 0 | volume 1 contact at y=0..1 and y=9..10 only
    tuples, ids = [], []
    for y in range(11):
        tuples.append((0, y, 0, 8))
        ids.append(0)
    for y in (0, 1, 9, 10):
        tuples.append((1, y, 0, 8))
        ids.append(1)
    f = field_from_tuples(tuples)
    order = np.lexsort(
        (np.array(tuples, dtype=tcol.COLUMN_DTYPE)["z1"],
         np.array(tuples, dtype=tcol.COLUMN_DTYPE)["iy"],
         np.array(tuples, dtype=tcol.COLUMN_DTYPE)["ix"])
    )
    ids = np.asarray(ids)[order]
    edges = tp.generate_passages(f, ids, d_th=1.5 * f.voxel)
    assert len(edges) == 2
    assert all(e.pair == (0, 1) for e in edges)


def test_same_volume_no_self_edge():
    f = field_from_tuples([(0, 0, 0, 5), (1, 0, 0, 5)])
    assert tp.generate_passages(f, np.array([0, 0]), d_th=0.15) == []


def quad_separates(e, quad, vox_to_volume):
    """Recover the two cells a quad separates and check their volumes."""
    pts = e.points[quad]
    xs, ys, zs = set(pts[:, 0]), set(pts[:, 1]), set(pts[:, 2])
    z = min(zs)
    if len(xs) == 1:  # x-normal face
        gx = xs.pop()
        y = min(ys)
        ca, cb = (gx - 1, y, z), (gx, y, z)
    else:
        gy = ys.pop()
        x = min(xs)
        ca, cb = (x, gy - 1, z), (x, gy, z)
    va, vb = vox_to_volume.get(ca), vox_to_volume.get(cb)
    return va is not None and vb is not None and {va, vb} == set(e.pair)


def test_quads_separate_their_volumes():
    rng = np.random.default_rng(53)
    tuples = [(ix, iy, 0, int(rng.integers(8, 20))) for ix in range(10) for iy in range(10)]
    f = field_from_tuples(tuples)
    vols = tvol.grow_volumes(f, 0.10)
    ids = tvol.column_volume_ids(f, vols)
    vox_to_volume = {}
    for i, c in enumerate(f.columns):
        for z in range(int(c["z1"]), int(c["z2"]) + 1):
            vox_to_volume[(int(c["ix"]), int(c["iy"]), z)] = int(ids[i])
    edges = tp.generate_passages(f, ids, d_th=1.5 * f.voxel)
    assert edges, "fixture should produce at least one passage"
    for e in edges:
        for quad in e.quads:
            assert quad_separates(e, quad, vox_to_volume)


def test_all_passages_vertical():
    rng = np.random.default_rng(54)
    tuples = [(ix, iy, 0, int(rng.integers(8, 20))) for ix in range(8) for iy in range(8)]
    f = field_from_tuples(tuples)
    vols = tvol.grow_volumes(f, 0.10)
    ids = tvol.column_volume_ids(f, vols)
    for e in tp.generate_passages(f, ids, d_th=1.5 * f.voxel):
        for quad in e.quads:
            pts = e.points[quad]
            # a vertical face has a single x or a single y coordinate
            assert len(set(pts[:, 0])) == 1 or len(set(pts[:, 1])) == 1


def test_pair_symmetry():
    f = field_from_tuples([(0, 0, 0, 5), (1, 0, 0, 5)])
    a = tp.generate_passages(f, np.array([0, 1]), d_th=0.15)
    b = tp.generate_passages(f, np.array([1, 0]), d_th=0.15)
    assert len(a) == len(b) == 1
    assert a[0].pair == b[0].pair == (0, 1)
    assert np.array_equal(a[0].points, b[0].points)


def test_points_are_union_of_quad_corners():
    f = field_from_tuples([(0, 0, 2, 4), (1, 0, 2, 4)])
    e = tp.generate_passages(f, np.array([0, 1]), d_th=0.15)[0]
    from_quads = np.unique(e.points[e.quads.reshape(-1)], axis=0)
    assert np.array_equal(from_quads, e.points)

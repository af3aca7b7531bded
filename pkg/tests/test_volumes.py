import numpy as np
import pytest

from topovox import columns as tcol
from topovox import volumes as tvol
from topovox.voxelgrid import OccupancyGrid


def field_from_tuples(tuples, dims=(64, 64, 64), voxel=0.5, floor=0):
    cols = np.array(tuples, dtype=tcol.COLUMN_DTYPE)
    order = np.lexsort((cols["z1"], cols["iy"], cols["ix"]))
    return tcol.ColumnField(
        columns=cols[order],
        origin=np.zeros(3),
        voxel=voxel,
        dims=dims,
        floor_z_index=floor,
    )


def test_equal_tops_merge():
    f = field_from_tuples([(0, 0, 0, 10), (1, 0, 0, 10)])
    vols = tvol.grow_volumes(f, 0.10)
    assert len(vols) == 1
    assert len(vols[0].column_indices) == 2


def test_top_difference_beyond_tolerance_splits():
    # len 10 each, tops differ by 2 layers, threshold 0.1 * 10 = 1.0 < 2
    f = field_from_tuples([(0, 0, 1, 10), (1, 0, 3, 12)])
    vols = tvol.grow_volumes(f, 0.10)
    assert len(vols) == 2


def test_top_difference_within_tolerance_merges():
    # tops differ by 3 > 0.1 * min-len 20: splits
    f = field_from_tuples([(0, 0, 1, 20), (1, 0, 0, 23)])
    assert len(tvol.grow_volumes(f, 0.10)) == 2
    # tops 20 and 22 differ exactly by the threshold: inclusive comparison merges
    f2 = field_from_tuples([(0, 0, 1, 20), (1, 0, 3, 22)])
    vols = tvol.grow_volumes(f2, 0.10)
    assert len(vols) == 1


def test_slanted_ceiling_chains_into_one_volume():
    # 30-cell row, top rises one layer every 12 cells, len ~20
    tuples = []
    for i in range(30):
        top = 20 + i // 12
        tuples.append((i, 0, 0, top))
    f = field_from_tuples(tuples)
    vols = tvol.grow_volumes(f, 0.10)
    assert len(vols) == 1


def test_sharp_step_splits():
    tuples = [(i, 0, 0, 20) for i in range(10)] + [(i, 0, 0, 26) for i in range(10, 20)]
    f = field_from_tuples(tuples)
    vols = tvol.grow_volumes(f, 0.10)
    assert len(vols) == 2


def test_table_fixture_two_volumes_bottom_discontinuity_ok():
    # room columns (full height), tabletop splits one cell column into
    # under-table and over-table runs; over-table shares the ceiling top
    tuples = [
        (0, 0, 1, 20),       # room
        (1, 0, 1, 5),        # under the table (top = table bottom)
        (1, 0, 8, 20),       # above the table (top = ceiling)
        (2, 0, 1, 20),       # room
    ]
    f = field_from_tuples(tuples)
    vols = tvol.grow_volumes(f, 0.10)
    assert len(vols) == 2
    sizes = sorted(len(v.column_indices) for v in vols)
    assert sizes == [1, 3]  # under-table alone; room + over-table merged


def test_volume_size_arithmetic():
    f = field_from_tuples([(0, 0, 0, 7)], voxel=0.5)  # 8 voxels * 0.125
    vols = tvol.grow_volumes(f, 0.10)
    assert vols[0].size_m3 == pytest.approx(1.0)

    tuples = [(i, j, 0, 19) for i in range(10) for j in range(10)]
    f2 = field_from_tuples(tuples, voxel=0.15)
    vols2 = tvol.grow_volumes(f2, 0.10)
    assert len(vols2) == 1
    assert vols2[0].size_m3 == pytest.approx(100 * 20 * 0.15 ** 3)  # 6.75


def test_volumes_partition_columns():
    rng = np.random.default_rng(41)
    tuples = []
    used = set()
    for _ in range(300):
        ix, iy = int(rng.integers(0, 20)), int(rng.integers(0, 20))
        z1 = int(rng.integers(0, 10))
        z2 = z1 + int(rng.integers(1, 20))
        key = (ix, iy)
        if key in used:
            continue
        used.add(key)
        tuples.append((ix, iy, z1, z2))
    f = field_from_tuples(tuples)
    vols = tvol.grow_volumes(f, 0.10)
    seen = np.concatenate([v.column_indices for v in vols])
    assert len(seen) == len(f)
    assert len(np.unique(seen)) == len(f)
    ids = tvol.column_volume_ids(f, vols)
    assert (ids >= 0).all()


def test_pairwise_rule_holds_along_accepted_adjacencies():
    rng = np.random.default_rng(42)
    tuples = [(ix, iy, 0, int(rng.integers(10, 25))) for ix in range(15) for iy in range(15)]
    f = field_from_tuples(tuples)
    rel_tol = 0.10
    vols = tvol.grow_volumes(f, rel_tol)
    ids = tvol.column_volume_ids(f, vols)
    cols = f.columns
    lengths = f.lengths()
    # within each volume, rule-satisfying adjacencies must connect it
    for v in vols:
        members = set(int(i) for i in v.column_indices)
        if len(members) == 1:
            continue
        cell_of = {(int(cols[i]["ix"]), int(cols[i]["iy"])): i for i in members}
        adj = {i: [] for i in members}
        for (ix, iy), i in cell_of.items():
            for dx, dy in ((1, 0), (0, 1)):
                j = cell_of.get((ix + dx, iy + dy))
                if j is None:
                    continue
                if abs(int(cols[i]["z2"]) - int(cols[j]["z2"])) <= rel_tol * min(
                    lengths[i], lengths[j]
                ):
                    adj[i].append(j)
                    adj[j].append(i)
        # BFS connectivity over rule edges
        start = next(iter(members))
        seen = {start}
        stack = [start]
        while stack:
            c = stack.pop()
            for j in adj[c]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        assert seen == members


def test_deterministic_ids():
    rng = np.random.default_rng(43)
    tuples = [(ix, iy, 0, int(rng.integers(10, 22))) for ix in range(10) for iy in range(10)]
    f = field_from_tuples(tuples)
    a = tvol.grow_volumes(f, 0.10)
    b = tvol.grow_volumes(f, 0.10)
    assert [tuple(v.column_indices) for v in a] == [tuple(v.column_indices) for v in b]


def test_rel_tol_validated():
    f = field_from_tuples([(0, 0, 0, 5)])
    with pytest.raises(ValueError):
        tvol.grow_volumes(f, 0.0)
    with pytest.raises(ValueError):
        tvol.grow_volumes(f, 1.0)

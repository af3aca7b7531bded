"""Deterministic synthetic scenes with machine-readable ground truth.

Every fixture is laid out on integer cell coordinates of the target
voxel size, with wall planes placed mid-cell (half a voxel away from
any cell boundary) so that rasterization is float-robust: each plane
occupies exactly the intended cell column. Ground truth is derived
from the same integer layout, never from the pipeline.

Surface sampling uses regular lattices with a golden-ratio stagger on
vertical walls, which spreads wall points evenly across height
histogram bins while staying fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cloud import PointCloud, write_cloud
from .raster import write_label_image

KINDS = (
    "two_rooms_door",
    "slanted_ceiling",
    "two_storey",
    "corridor_T",
    "table_room",
    "glass_front",
)

_PHI = 0.6180339887498949


@dataclass
class Fixture:
    kind: str
    cloud: PointCloud
    gt: dict
    label_image: np.ndarray | None = None

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        created = []
        cloud_path = out_dir / f"{self.kind}.ply"
        write_cloud(self.cloud, cloud_path, "ply_binary_le")
        created.append(cloud_path)
        gt_path = out_dir / f"{self.kind}_gt.json"
        gt_path.write_text(json.dumps(self.gt, indent=1, sort_keys=True) + "\n")
        created.append(gt_path)
        if self.label_image is not None:
            img_path = out_dir / f"{self.kind}_gt_labels.png"
            write_label_image(self.label_image, img_path)
            created.append(img_path)
        return created


# ---------------------------------------------------------------------------
# sampling primitives (all deterministic)
# ---------------------------------------------------------------------------

def _lattice(lo: float, hi: float, spacing: float) -> np.ndarray:
    """1D sample positions inset half a step from both ends."""
    if hi - lo < spacing:
        return np.array([(lo + hi) / 2.0])
    n = int(np.floor((hi - lo) / spacing))
    return lo + spacing / 2.0 + np.arange(n) * spacing


def _stratified(lo: float, hi: float, spacing: float, phase: float) -> np.ndarray:
    """Evenly stepped positions whose fractional phase varies per call.

    Aggregated over many phases the samples fill every histogram bin
    uniformly, unlike a shared lattice which would imprint a comb onto
    the z histogram and confuse the storey detector.
    """
    span = hi - lo
    if span < spacing:
        return np.array([(lo + hi) / 2.0])
    n = int(np.floor(span / spacing))
    step = span / (n + 1)
    return lo + (np.arange(n + 1) + phase) * step


def _wall_x(x: float, y0, y1, z0, z1, spacing) -> np.ndarray:
    """Vertical wall with normal along x; z phase staggered per y column."""
    ys = _lattice(y0, y1, spacing)
    pts = []
    for i, y in enumerate(ys):
        zs = _stratified(z0, z1, spacing, _PHI * i % 1.0)
        pts.append(np.column_stack([np.full(len(zs), x), np.full(len(zs), y), zs]))
    return np.vstack(pts)


def _wall_y(y: float, x0, x1, z0, z1, spacing) -> np.ndarray:
    w = _wall_x(y, x0, x1, z0, z1, spacing)
    return w[:, [1, 0, 2]]


def _wall_y_profile(y: float, x0, x1, spacing, top_of) -> np.ndarray:
    """Wall with normal along y whose height follows top_of(x)."""
    xs = _lattice(x0, x1, spacing)
    pts = []
    for i, x in enumerate(xs):
        zs = _stratified(0.0, top_of(x), spacing, _PHI * i % 1.0)
        pts.append(np.column_stack([np.full(len(zs), x), np.full(len(zs), y), zs]))
    return np.vstack(pts)


def _horizontal(z: float, x0, x1, y0, y1, spacing) -> np.ndarray:
    xs = _lattice(x0, x1, spacing)
    ys = _lattice(y0, y1, spacing)
    g = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    return np.column_stack([g, np.full(len(g), z)])


def _surface_z(x0, x1, y0, y1, spacing, z_of) -> np.ndarray:
    xs = _lattice(x0, x1, spacing)
    ys = _lattice(y0, y1, spacing)
    g = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    z = np.array([z_of(x) for x in g[:, 0]])
    return np.column_stack([g, z])


class _CellLayout:
    """Integer-cell geometry helper.

    Cell k (1-based, padding is cell 0) spans [(k-1)*v, k*v) in cloud
    coordinates once the grid adds its one-voxel padding. plane(k)
    returns a wall position safely inside cell k; boundary(j, j+1)
    returns the exact cell boundary (used for opening jambs).
    """

    def __init__(self, voxel: float):
        self.v = voxel

    def plane(self, k: int) -> float:
        return 0.0 if k == 1 else (k - 0.5) * self.v

    def boundary(self, k: int) -> float:
        """Boundary between cell k and k+1."""
        return k * self.v


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def two_rooms_door(
    voxel: float = 0.15,
    spacing: float = 0.04,
    room_cells_x: int = 25,
    room_cells_y: int = 25,
    ceil_cell: int = 20,
    door_cells: int = 6,
    door_top_cell: int = 14,
) -> Fixture:
    """Two rooms sharing a dividing wall with a door opening (no leaf)."""
    L = _CellLayout(voxel)
    ax0, ax1 = 2, 1 + room_cells_x              # room A free x cells
    dx = ax1 + 1                                # divider wall cell
    bx0, bx1 = dx + 1, dx + room_cells_x        # room B free x cells
    ex = bx1 + 1                                # east wall cell
    ny = 1 + room_cells_y                       # last free y cell
    wy = ny + 1                                 # north wall cell
    door_y0 = 2 + (room_cells_y - door_cells) // 2
    door_y1 = door_y0 + door_cells - 1

    x_east = L.plane(ex)
    y_north = L.plane(wy)
    z_ceil = L.plane(ceil_cell)
    door_lo = L.boundary(door_y0 - 1)
    door_hi = L.boundary(door_y1)
    door_top = L.boundary(door_top_cell)

    parts = [
        _horizontal(0.0, 0.0, x_east, 0.0, y_north, spacing),        # floor
        _horizontal(z_ceil, 0.0, x_east, 0.0, y_north, spacing),     # ceiling
        _wall_x(0.0, 0.0, y_north, 0.0, z_ceil, spacing),            # west
        _wall_x(x_east, 0.0, y_north, 0.0, z_ceil, spacing),         # east
        _wall_y(0.0, 0.0, x_east, 0.0, z_ceil, spacing),             # south
        _wall_y(y_north, 0.0, x_east, 0.0, z_ceil, spacing),         # north
        # divider wall: two side pieces plus the lintel over the door
        _wall_x(L.plane(dx), 0.0, door_lo, 0.0, z_ceil, spacing),
        _wall_x(L.plane(dx), door_hi, y_north, 0.0, z_ceil, spacing),
        _wall_x(L.plane(dx), door_lo, door_hi, door_top, z_ceil, spacing),
    ]
    cloud = PointCloud(np.vstack(parts))

    # region1 ground-truth raster on the pipeline grid
    nx_dims, ny_dims = ex + 2, wy + 2
    labels = np.zeros((nx_dims, ny_dims), dtype=np.int64)
    labels[ax0 : ax1 + 1, 2 : ny + 1] = 1
    labels[bx0 : bx1 + 1, 2 : ny + 1] = 2
    labels[dx, door_y0 : door_y1 + 1] = 3

    room_m3 = room_cells_x * room_cells_y * (ceil_cell - 2) * voxel ** 3
    door_m3 = door_cells * (door_top_cell - 1) * voxel ** 3
    gt = {
        "kind": "two_rooms_door",
        "storeys": 1,
        "peaks": [0.0, z_ceil],
        "region1_count": 3,
        "room_count": 2,
        "connection_count": 1,
        "region1_edge_count": 2,
        "volume_count": 3,
        "room_volume_m3": room_m3,
        "door_volume_m3": door_m3,
        "door_cells": {
            "ix": [dx, dx],
            "iy": [door_y0, door_y1],
        },
        "config": {"voxel": voxel, "alpha": 1.2},
    }
    return Fixture(kind="two_rooms_door", cloud=cloud, gt=gt, label_image=labels)


def slanted_ceiling(
    voxel: float = 0.15,
    spacing: float = 0.04,
    slope: float = 0.05,
    step_frac: float = 0.0,
    plan_cells_x: int = 40,
    plan_cells_y: int = 27,
    base_ceil: float = 2.7,
) -> Fixture:
    """Single room with a sloped ceiling, optionally with a sharp step."""
    L = _CellLayout(voxel)
    ex, wy = plan_cells_x + 2, plan_cells_y + 2
    x_east, y_north = L.plane(ex), L.plane(wy)
    x_step = x_east / 2.0
    step = step_frac * base_ceil

    def top_of(x: float) -> float:
        z = base_ceil + slope * x
        if step and x > x_step:
            z -= step
        return z

    parts = [
        _horizontal(0.0, 0.0, x_east, 0.0, y_north, spacing),
        _surface_z(0.0, x_east, 0.0, y_north, spacing, top_of),      # ceiling
        _wall_x(0.0, 0.0, y_north, 0.0, top_of(0.0), spacing),
        _wall_x(x_east, 0.0, y_north, 0.0, top_of(x_east), spacing),
        _wall_y_profile(0.0, 0.0, x_east, spacing, top_of),
        _wall_y_profile(y_north, 0.0, x_east, spacing, top_of),
    ]
    if step:
        # vertical face of the ceiling step
        hi = base_ceil + slope * x_step
        parts.append(_wall_x(x_step, 0.0, y_north, hi - step, hi, spacing))
    cloud = PointCloud(np.vstack(parts))
    z_max = float(cloud.points[:, 2].max())
    gt = {
        "kind": "slanted_ceiling",
        "storeys": 1,
        "region1_count": 1,
        "volume_count": 1 if not step else 2,
        "volume_count_is_minimum": bool(step),
        "config": {"voxel": voxel, "peaks": [0.0, z_max]},
    }
    return Fixture(kind="slanted_ceiling", cloud=cloud, gt=gt)


def two_storey(
    voxel: float = 0.15,
    spacing: float = 0.04,
    plan_cells_x: int = 34,
    plan_cells_y: int = 27,
    ceil_cell: int = 20,
    slab_cells: int = 3,
) -> Fixture:
    """Two stacked single-room storeys separated by a solid slab."""
    L = _CellLayout(voxel)
    ex, wy = plan_cells_x + 2, plan_cells_y + 2
    x_east, y_north = L.plane(ex), L.plane(wy)
    z_c0 = L.plane(ceil_cell)
    z_f1 = L.plane(ceil_cell + slab_cells)
    z_c1 = L.plane(2 * ceil_cell + slab_cells)
    parts = [
        _horizontal(0.0, 0.0, x_east, 0.0, y_north, spacing),
        _horizontal(z_c0, 0.0, x_east, 0.0, y_north, spacing),
        _horizontal(z_f1, 0.0, x_east, 0.0, y_north, spacing),
        _horizontal(z_c1, 0.0, x_east, 0.0, y_north, spacing),
        _wall_x(0.0, 0.0, y_north, 0.0, z_c1, spacing),
        _wall_x(x_east, 0.0, y_north, 0.0, z_c1, spacing),
        _wall_y(0.0, 0.0, x_east, 0.0, z_c1, spacing),
        _wall_y(y_north, 0.0, x_east, 0.0, z_c1, spacing),
    ]
    cloud = PointCloud(np.vstack(parts))
    gt = {
        "kind": "two_storey",
        "storeys": 2,
        "peaks": [0.0, z_c0, z_f1, z_c1],
        "region1_count_per_storey": [1, 1],
        "config": {"voxel": voxel},
    }
    return Fixture(kind="two_storey", cloud=cloud, gt=gt)


def table_room(
    voxel: float = 0.15,
    spacing: float = 0.04,
    plan_cells_x: int = 27,
    plan_cells_y: int = 27,
    ceil_cell: int = 19,
    table_cell: int = 5,
) -> Fixture:
    """Room with a table: free space above and beneath the tabletop."""
    L = _CellLayout(voxel)
    ex, wy = plan_cells_x + 2, plan_cells_y + 2
    x_east, y_north = L.plane(ex), L.plane(wy)
    z_ceil = L.plane(ceil_cell)
    z_table = L.plane(table_cell)
    # tabletop footprint on cells [10..14] x [10..14]: small enough that
    # the height histogram's floor and ceiling spikes stay dominant
    tx0, tx1 = L.boundary(9), L.boundary(14)
    parts = [
        _horizontal(0.0, 0.0, x_east, 0.0, y_north, spacing),
        _horizontal(z_ceil, 0.0, x_east, 0.0, y_north, spacing),
        _wall_x(0.0, 0.0, y_north, 0.0, z_ceil, spacing),
        _wall_x(x_east, 0.0, y_north, 0.0, z_ceil, spacing),
        _wall_y(0.0, 0.0, x_east, 0.0, z_ceil, spacing),
        _wall_y(y_north, 0.0, x_east, 0.0, z_ceil, spacing),
        _horizontal(z_table, tx0, tx1, tx0, tx1, spacing),           # tabletop
    ]
    # four legs: vertical point columns at the tabletop corner cells
    for cx in (10, 14):
        for cy in (10, 14):
            x, y = L.plane(cx), L.plane(cy)
            zs = _lattice(0.0, z_table, spacing / 2)
            parts.append(np.column_stack([np.full(len(zs), x), np.full(len(zs), y), zs]))
    cloud = PointCloud(np.vstack(parts))
    gt = {
        "kind": "table_room",
        "storeys": 1,
        "region1_count": 1,
        "volume_count": 2,
        "config": {"voxel": voxel},
    }
    return Fixture(kind="table_room", cloud=cloud, gt=gt)


def corridor_T(
    voxel: float = 0.15,
    spacing: float = 0.04,
    arm_cells: int = 38,
    width_cells: int = 5,
    stem_cells: int = 20,
    ceil_cell: int = 19,
    prune_len: int = 4,
) -> Fixture:
    """T-shaped corridor: east and west arms plus a stem going south.

    The free footprint (in cells): a horizontal bar of
    2*arm_cells + width_cells columns by width_cells rows, with the stem
    hanging below its middle. Ground-truth area labels come from the
    naive 2D reference implementation in this module.
    """
    L = _CellLayout(voxel)
    bar_x0 = 2
    bar_x1 = bar_x0 + 2 * arm_cells + width_cells - 1
    stem_x0 = bar_x0 + arm_cells
    stem_x1 = stem_x0 + width_cells - 1
    # rows: stem occupies y cells [2 .. stem_cells+1], bar sits above it
    bar_y0 = stem_cells + 2
    bar_y1 = bar_y0 + width_cells - 1
    ex, wy = bar_x1 + 1, bar_y1 + 1
    z_ceil = L.plane(ceil_cell)

    free = np.zeros((ex + 2, wy + 2), dtype=bool)
    free[bar_x0 : bar_x1 + 1, bar_y0 : bar_y1 + 1] = True
    free[stem_x0 : stem_x1 + 1, 2 : bar_y0] = True

    parts = [_footprint_walls(free, L, z_ceil, spacing)]
    parts.append(_footprint_floor_ceiling(free, L, z_ceil, spacing))
    cloud = PointCloud(np.vstack(parts))

    # label raster on the same crop the pipeline uses: column bounds + 1
    crop = free[bar_x0 - 1 : bar_x1 + 2, 1 : bar_y1 + 2]
    area_labels = _naive_area_labels(crop, prune_len)
    n_areas = int(area_labels.max())
    free_m3 = int(free.sum()) * (ceil_cell - 2) * voxel ** 3
    # the corridor spans width_cells free cells, i.e. walls sit
    # (width_cells + 1) cells apart; alpha must clear that gap so no
    # empty circle threads the corridor
    gt = {
        "kind": "corridor_T",
        "storeys": 1,
        "region1_count": 1,
        "volume_count": 1,
        "sub_region_count": n_areas,
        "region_volume_m3": free_m3,
        "config": {"voxel": voxel, "alpha": (width_cells + 3) * voxel},
    }
    return Fixture(kind="corridor_T", cloud=cloud, gt=gt, label_image=area_labels)


def glass_front(
    voxel: float = 0.15,
    spacing: float = 0.04,
    room_cells_x: int = 24,
    room_cells_y: int = 20,
    corridor_cells: int = 7,
    ceil_cell: int = 19,
) -> Fixture:
    """Two rooms fronting a corridor through invisible glass walls.

    The scanner never sees the glass, so rooms and corridor merge into
    one region; only the 2D stage separates them again.
    """
    L = _CellLayout(voxel)
    ax0, ax1 = 2, 1 + room_cells_x
    dx = ax1 + 1
    bx0, bx1 = dx + 1, dx + room_cells_x
    ex = bx1 + 1
    cor_y0, cor_y1 = 2, 1 + corridor_cells
    room_y0, room_y1 = cor_y1 + 1, cor_y1 + room_cells_y
    wy = room_y1 + 1
    z_ceil = L.plane(ceil_cell)

    free = np.zeros((ex + 2, wy + 2), dtype=bool)
    free[ax0 : bx1 + 1, cor_y0 : cor_y1 + 1] = True        # corridor, full width
    free[ax0 : ax1 + 1, room_y0 : room_y1 + 1] = True      # room A
    free[bx0 : bx1 + 1, room_y0 : room_y1 + 1] = True      # room B

    parts = [
        _footprint_walls(free, L, z_ceil, spacing),
        _footprint_floor_ceiling(free, L, z_ceil, spacing),
    ]
    cloud = PointCloud(np.vstack(parts))
    gt = {
        "kind": "glass_front",
        "storeys": 1,
        "region1_count": 1,
        "volume_count": 1,
        "sub_region_count_min": 2,
        "room_core_cells": {
            "a": [ax0 + room_cells_x // 2, room_y0 + room_cells_y // 2],
            "b": [bx0 + room_cells_x // 2, room_y0 + room_cells_y // 2],
        },
        "config": {"voxel": voxel, "alpha": 10 * voxel},
    }
    return Fixture(kind="glass_front", cloud=cloud, gt=gt)


def _footprint_walls(free: np.ndarray, L: _CellLayout, z_top: float, spacing: float):
    """Wall points for every occupied cell bordering a free cell.

    Walls go at the mid-plane of the occupied cell so they rasterize
    into exactly that cell. The west/south outermost planes sit at the
    cloud minimum, which the grid maps to cell 1; the layout keeps all
    wall cells at index >= 1 accordingly.
    """
    parts = []
    nx, ny = free.shape
    for x in range(nx):
        for y in range(ny):
            if free[x, y]:
                continue
            # emit a wall strip for each adjacent free cell
            if x + 1 < nx and free[x + 1, y]:
                parts.append(
                    _wall_x(L.plane(x), L.boundary(y - 1), L.boundary(y), 0.0, z_top, spacing)
                )
            if x - 1 >= 0 and free[x - 1, y]:
                parts.append(
                    _wall_x(L.plane(x), L.boundary(y - 1), L.boundary(y), 0.0, z_top, spacing)
                )
            if y + 1 < ny and free[x, y + 1]:
                parts.append(
                    _wall_y(L.plane(y), L.boundary(x - 1), L.boundary(x), 0.0, z_top, spacing)
                )
            if y - 1 >= 0 and free[x, y - 1]:
                parts.append(
                    _wall_y(L.plane(y), L.boundary(x - 1), L.boundary(x), 0.0, z_top, spacing)
                )
    return np.vstack(parts)


def _footprint_floor_ceiling(free: np.ndarray, L: _CellLayout, z_ceil: float, spacing: float):
    """Floor and ceiling patches over every free cell (plus wall cells)."""
    parts = []
    cells = np.argwhere(free)
    x_lo, x_hi = cells[:, 0].min() - 1, cells[:, 0].max() + 1
    y_lo, y_hi = cells[:, 1].min() - 1, cells[:, 1].max() + 1
    for x in range(x_lo, x_hi + 1):
        runs = []
        y = y_lo
        while y <= y_hi:
            if free[x, y]:
                y0 = y
                while y <= y_hi and free[x, y]:
                    y += 1
                runs.append((y0, y - 1))
            y += 1
        for y0, y1 in runs:
            lo_x, hi_x = L.boundary(x - 1), L.boundary(x)
            lo_y, hi_y = L.boundary(y0 - 1), L.boundary(y1)
            parts.append(_horizontal(0.0, lo_x, hi_x, lo_y, hi_y, spacing))
            parts.append(_horizontal(z_ceil, lo_x, hi_x, lo_y, hi_y, spacing))
    return np.vstack(parts)


# ---------------------------------------------------------------------------
# naive 2D reference (independent of the areagraph module)
# ---------------------------------------------------------------------------

def _naive_waypoints(free: np.ndarray) -> set[tuple[int, int]]:
    occ = sorted((int(x), int(y)) for x, y in np.argwhere(~free))
    out = set()
    for x, y in ((int(a), int(b)) for a, b in np.argwhere(free)):
        ranked = sorted(occ, key=lambda o: ((o[0] - x) ** 2 + (o[1] - y) ** 2, o))
        s1, s2 = ranked[0], ranked[1]
        d1 = ((s1[0] - x) ** 2 + (s1[1] - y) ** 2) ** 0.5
        d2 = ((s2[0] - x) ** 2 + (s2[1] - y) ** 2) ** 0.5
        if (abs(s1[0] - s2[0]) > 1 or abs(s1[1] - s2[1]) > 1) and d2 - d1 <= 0.5:
            out.add((x, y))
    return out


def _naive_components(cells: set[tuple[int, int]]):
    comps = []
    left = set(cells)
    while left:
        start = min(left)
        comp = {start}
        stack = [start]
        left.discard(start)
        while stack:
            cx, cy = stack.pop()
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    n = (cx + dx, cy + dy)
                    if n in left:
                        left.discard(n)
                        comp.add(n)
                        stack.append(n)
        comps.append(comp)
    return comps


def _naive_order_path(comp: set[tuple[int, int]]):
    if len(comp) == 1:
        return [next(iter(comp))], False
    nbrs = {
        c: sorted(
            n
            for n in (
                (c[0] + dx, c[1] + dy)
                for dx in (-1, 0, 1)
                for dy in (-1, 0, 1)
                if dx or dy
            )
            if n in comp
        )
        for c in comp
    }
    ends = sorted(c for c in comp if len(nbrs[c]) <= 1)
    cycle = not ends
    cur = min(comp) if cycle else ends[0]
    order, seen = [cur], {cur}
    while True:
        nxt = [n for n in nbrs[cur] if n not in seen]
        if not nxt:
            break
        cur = nxt[0]
        order.append(cur)
        seen.add(cur)
    return order, cycle


def _naive_chains(free: np.ndarray, prune_len: int):
    """Skeleton chains after spur pruning: plain-python reference."""
    wps = _naive_waypoints(free)

    def degree(cell, cells):
        x, y = cell
        return sum(
            (x + dx, y + dy) in cells
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            if dx or dy
        )

    while True:
        junction = {c for c in wps if degree(c, wps) >= 3}
        junction_comps = _naive_components(junction)
        comp_of = {c: k for k, jc in enumerate(junction_comps) for c in jc}
        removed = False
        for comp in _naive_components(wps - junction):
            order, cycle = _naive_order_path(comp)
            if cycle or len(order) >= prune_len:
                continue
            touched = set()
            for end in (order[0], order[-1]):
                for j in junction:
                    if abs(j[0] - end[0]) <= 1 and abs(j[1] - end[1]) <= 1:
                        touched.add(comp_of[j])
            if len(touched) == 1:
                wps -= comp
                removed = True
        if not removed:
            break
    junction = {c for c in wps if degree(c, wps) >= 3}
    chains = []
    for comp in _naive_components(wps - junction):
        order, _ = _naive_order_path(comp)
        if order[-1] < order[0]:
            order = order[::-1]
        chains.append(order)
    chains.sort(key=lambda ch: ch[0])
    return chains


def _naive_area_labels(free: np.ndarray, prune_len: int) -> np.ndarray:
    """Nearest-chain labeling (1-based), the fixture-side reference."""
    chains = _naive_chains(free, prune_len)
    labels = np.zeros(free.shape, dtype=np.int64)
    if not chains:
        labels[free] = 1
        return labels
    for x, y in ((int(a), int(b)) for a, b in np.argwhere(free)):
        best = None
        for eid, chain in enumerate(chains):
            for cx, cy in chain:
                d = (cx - x) ** 2 + (cy - y) ** 2
                if best is None or (d, eid) < best[:2]:
                    best = (d, eid)
        labels[x, y] = best[1] + 1
    return labels


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------

_BUILDERS = {
    "two_rooms_door": two_rooms_door,
    "slanted_ceiling": slanted_ceiling,
    "two_storey": two_storey,
    "corridor_T": corridor_T,
    "table_room": table_room,
    "glass_front": glass_front,
}


def make_fixture(kind: str, **params) -> Fixture:
    if kind not in _BUILDERS:
        raise ValueError(f"unknown fixture kind {kind!r}; choose from {sorted(_BUILDERS)}")
    return _BUILDERS[kind](**params)

"""Free-space columns: maximal vertical runs of free voxels per (x, y) cell.

A column compresses a run of free voxels at one horizontal cell into
four integers (ix, iy, z1, z2). Extraction scans every cell top to
bottom, then drops runs that reach the grid's top padding (no ceiling
above means outside the building) and clamps runs that leak below the
storey floor through scan holes back up to the floor layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .voxelgrid import OccupancyGrid

COLUMN_DTYPE = np.dtype([("ix", np.int32), ("iy", np.int32), ("z1", np.int32), ("z2", np.int32)])


@dataclass(frozen=True)
class Column:
    """Single-column view with grid-index and metric coordinates."""

    ix: int
    iy: int
    z1: int
    z2: int
    origin: np.ndarray
    voxel: float

    @property
    def x(self) -> float:
        return float(self.origin[0] + (self.ix + 0.5) * self.voxel)

    @property
    def y(self) -> float:
        return float(self.origin[1] + (self.iy + 0.5) * self.voxel)

    @property
    def z_bottom(self) -> float:
        return float(self.origin[2] + self.z1 * self.voxel)

    @property
    def z_top(self) -> float:
        # metric extent covers the voxels, so the top face of layer z2
        return float(self.origin[2] + (self.z2 + 1) * self.voxel)

    @property
    def height_voxels(self) -> int:
        return self.z2 - self.z1 + 1


@dataclass(frozen=True)
class ColumnField:
    """All columns of one storey, lex-sorted by (ix, iy, z1)."""

    columns: np.ndarray  # structured COLUMN_DTYPE
    origin: np.ndarray
    voxel: float
    dims: tuple[int, int, int]
    floor_z_index: int
    stats: dict = dc_field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.columns)

    def column(self, i: int) -> Column:
        c = self.columns[i]
        return Column(
            ix=int(c["ix"]), iy=int(c["iy"]), z1=int(c["z1"]), z2=int(c["z2"]),
            origin=self.origin, voxel=self.voxel,
        )

    def cell_index(self) -> dict[tuple[int, int], np.ndarray]:
        """Map (ix, iy) -> indices into columns, ordered by z1."""
        out: dict[tuple[int, int], list[int]] = {}
        for i, c in enumerate(self.columns):
            out.setdefault((int(c["ix"]), int(c["iy"])), []).append(i)
        return {k: np.asarray(v) for k, v in out.items()}

    def lengths(self) -> np.ndarray:
        return self.columns["z2"] - self.columns["z1"] + 1


def _sorted_field(cols: np.ndarray, grid: OccupancyGrid, stats=None) -> ColumnField:
    order = np.lexsort((cols["z1"], cols["iy"], cols["ix"]))
    return ColumnField(
        columns=cols[order],
        origin=grid.origin,
        voxel=grid.voxel,
        dims=grid.dims,
        floor_z_index=grid.floor_z_index,
        stats=stats or {},
    )


def raw_runs(grid: OccupancyGrid) -> ColumnField:
    """Maximal vertical free runs per cell, before pruning and clamping."""
    free = ~grid.occupancy
    nz = grid.dims[2]
    starts = free.copy()
    starts[:, :, 1:] &= grid.occupancy[:, :, :-1]
    ends = free.copy()
    ends[:, :, :-1] &= grid.occupancy[:, :, 1:]
    sx, sy, sz = np.nonzero(starts)
    ex, ey, ez = np.nonzero(ends)
    # nonzero() iterates C-order, so starts and ends already pair up per cell
    assert len(sx) == len(ex)
    cols = np.empty(len(sx), dtype=COLUMN_DTYPE)
    cols["ix"], cols["iy"], cols["z1"], cols["z2"] = sx, sy, sz, ez
    return _sorted_field(cols, grid)


def prune_unbounded(field: ColumnField, grid: OccupancyGrid) -> ColumnField:
    """Delete columns whose top reaches the grid padding (no ceiling)."""
    cols = field.columns
    nz = grid.dims[2]
    capped = cols["z2"] + 1 < nz
    valid = capped.copy()
    c = cols[capped]
    valid[capped] = grid.occupancy[c["ix"], c["iy"], c["z2"] + 1]
    stats = dict(field.stats)
    stats["unbounded_columns_deleted"] = int((~valid).sum())
    return _sorted_field(cols[valid], grid, stats)


def clamp_to_floor(field: ColumnField, grid: OccupancyGrid) -> ColumnField:
    """Raise runs leaking below the floor layer; drop runs entirely below it."""
    cols = field.columns.copy()
    fz = grid.floor_z_index
    below = cols["z2"] < fz
    crossing = (cols["z1"] < fz) & ~below
    cols["z1"][crossing] = fz
    stats = dict(field.stats)
    stats["columns_clamped_to_floor"] = int(crossing.sum())
    stats["below_floor_columns_deleted"] = int(below.sum())
    return _sorted_field(cols[~below], grid, stats)


def extract_columns(grid: OccupancyGrid) -> ColumnField:
    """Full extraction: maximal runs, exterior pruning, floor clamping."""
    return clamp_to_floor(prune_unbounded(raw_runs(grid), grid), grid)

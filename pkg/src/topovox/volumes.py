"""Merge contiguous columns of similar top height into volumes.

A seeded flood fill walks 4-adjacent columns and accepts a neighbor
when its top height differs from the currently accepted column by at
most rel_tol of the shorter column's height. Testing against the
frontier column rather than the seed lets gently sloping ceilings
chain into one volume while sharp local steps split space apart.
Bottom heights are deliberately unconstrained: the space over a table
merges with the room while the pocket beneath it stays separate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .columns import ColumnField

DEFAULT_REL_TOL = 0.10


@dataclass(frozen=True)
class Volume:
    id: int
    column_indices: np.ndarray  # indices into the owning ColumnField
    size_m3: float
    z_bottom: float  # metric extremes over all member columns
    z_top: float


def volume_size(field: ColumnField, column_indices) -> float:
    """Occupied free-space volume in cubic meters."""
    cols = field.columns[np.asarray(column_indices)]
    n_voxels = int((cols["z2"] - cols["z1"] + 1).sum())
    return n_voxels * field.voxel ** 3


def grow_volumes(field: ColumnField, rel_tol: float = DEFAULT_REL_TOL) -> list[Volume]:
    """Partition the columns of a storey into volumes.

    Deterministic: seeds are taken in (ix, iy, z1) order and the BFS
    frontier expands in sorted column order, so identical inputs give
    identical volume ids.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must be in (0, 1)")
    cols = field.columns
    n = len(cols)
    tops = cols["z2"].astype(np.int64)
    lengths = (cols["z2"] - cols["z1"] + 1).astype(np.int64)

    cell_index = field.cell_index()
    assignment = np.full(n, -1, dtype=np.int64)
    volumes = []

    for seed in range(n):
        if assignment[seed] != -1:
            continue
        vid = len(volumes)
        assignment[seed] = vid
        members = [seed]
        queue = deque([seed])
        while queue:
            c = queue.popleft()
            cx, cy = int(cols[c]["ix"]), int(cols[c]["iy"])
            for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                for nbr in cell_index.get((cx + dx, cy + dy), ()):
                    if assignment[nbr] != -1:
                        continue
                    if abs(tops[c] - tops[nbr]) <= rel_tol * min(lengths[c], lengths[nbr]):
                        assignment[nbr] = vid
                        members.append(int(nbr))
                        queue.append(int(nbr))
        idx = np.sort(np.asarray(members))
        member_cols = cols[idx]
        z_bottom = field.origin[2] + int(member_cols["z1"].min()) * field.voxel
        z_top = field.origin[2] + (int(member_cols["z2"].max()) + 1) * field.voxel
        volumes.append(
            Volume(
                id=vid,
                column_indices=idx,
                size_m3=volume_size(field, idx),
                z_bottom=float(z_bottom),
                z_top=float(z_top),
            )
        )
    return volumes


def column_volume_ids(field: ColumnField, volumes: list[Volume]) -> np.ndarray:
    """Per-column volume id array (the inverse of the partition)."""
    out = np.full(len(field), -1, dtype=np.int64)
    for v in volumes:
        out[v.column_indices] = v.id
    if (out < 0).any():
        raise ValueError("volumes do not cover every column")
    return out

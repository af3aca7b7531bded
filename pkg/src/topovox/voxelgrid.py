"""Binary 3D occupancy grid for one storey.

The grid covers the storey cloud with one voxel of padding on every
side so that boundary free cells always have an outside neighbor,
which keeps exterior-column pruning uniform. Occupancy is a dense
boolean array; construction is single-writer and the result is
treated as immutable afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .errors import CapacityError, EmptyCloudError
from .storeys import StoreySlab

DEFAULT_MEMORY_CAP = 2 * 1024 ** 3  # bytes of occupancy storage


@dataclass(frozen=True)
class OccupancyGrid:
    origin: np.ndarray        # (3,) min corner in meters
    voxel: float              # edge length in meters
    dims: tuple[int, int, int]
    occupancy: np.ndarray     # bool, shape dims
    floor_z_index: int

    @property
    def nx(self):
        return self.dims[0]

    @property
    def ny(self):
        return self.dims[1]

    @property
    def nz(self):
        return self.dims[2]

    def voxel_center(self, ix, iy, iz):
        return self.origin + (np.array([ix, iy, iz], dtype=np.float64) + 0.5) * self.voxel


def grid_extents(cloud: PointCloud, slab: StoreySlab, voxel: float):
    """Origin and dims covering the cloud and the slab z-span, plus padding."""
    lo, hi = cloud.bounds
    z_lo = min(lo[2], slab.floor_height)
    z_hi = max(hi[2], slab.ceiling_height)
    origin = np.array([lo[0] - voxel, lo[1] - voxel, z_lo - voxel])
    span = np.array([hi[0], hi[1], z_hi]) - origin
    dims = tuple(int(np.floor(s / voxel)) + 2 for s in span)
    return origin, dims


def rasterize(
    cloud: PointCloud,
    slab: StoreySlab,
    voxel: float,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> OccupancyGrid:
    """Mark every voxel containing at least one point as occupied."""
    if voxel <= 0:
        raise ValueError("voxel must be positive")
    if len(cloud) == 0:
        raise EmptyCloudError("cannot rasterize an empty cloud")
    origin, dims = grid_extents(cloud, slab, voxel)
    required = int(np.prod([np.int64(d) for d in dims]))
    if required > memory_cap:
        raise CapacityError(required_bytes=required, cap_bytes=memory_cap)
    occupancy = np.zeros(dims, dtype=bool)
    idx = np.floor((cloud.points - origin) / voxel).astype(np.int64)
    # padding guarantees in-bounds indices; clip guards float edge cases only
    idx = np.clip(idx, 0, np.array(dims) - 1)
    occupancy[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    floor_z_index = int(np.floor((slab.floor_height - origin[2]) / voxel))
    floor_z_index = min(max(floor_z_index, 0), dims[2] - 1)
    return OccupancyGrid(
        origin=origin,
        voxel=voxel,
        dims=dims,
        occupancy=occupancy,
        floor_z_index=floor_z_index,
    )


def dump_occupancy(grid: OccupancyGrid, path) -> None:
    """Debug dump: flat binary occupancy plus a JSON sidecar.

    The sidecar (<path>.json) records origin, voxel size, dims and the
    floor layer; the binary file holds one byte per voxel in C order.
    """
    import json
    from pathlib import Path

    path = Path(path)
    grid.occupancy.astype(np.uint8).tofile(path)
    sidecar = {
        "origin": [float(v) for v in grid.origin],
        "voxel": grid.voxel,
        "dims": list(grid.dims),
        "floor_z_index": grid.floor_z_index,
        "order": "C",
    }
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=1, sort_keys=True) + "\n"
    )


def load_occupancy(path) -> OccupancyGrid:
    """Read a grid written by dump_occupancy."""
    import json
    from pathlib import Path

    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    dims = tuple(sidecar["dims"])
    occupancy = np.fromfile(path, dtype=np.uint8).reshape(dims).astype(bool)
    return OccupancyGrid(
        origin=np.asarray(sidecar["origin"], dtype=np.float64),
        voxel=float(sidecar["voxel"]),
        dims=dims,
        occupancy=occupancy,
        floor_z_index=int(sidecar["floor_z_index"]),
    )


def is_occupied(grid: OccupancyGrid, ix: int, iy: int, iz: int) -> bool:
    nx, ny, nz = grid.dims
    if not (0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz):
        raise IndexError(f"voxel index ({ix}, {iy}, {iz}) out of bounds for dims {grid.dims}")
    return bool(grid.occupancy[ix, iy, iz])


def neighbors4(grid: OccupancyGrid, ix: int, iy: int) -> list[tuple[int, int]]:
    """In-bounds horizontal 4-neighbors of an (ix, iy) cell."""
    nx, ny = grid.dims[0], grid.dims[1]
    out = []
    for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        jx, jy = ix + dx, iy + dy
        if 0 <= jx < nx and 0 <= jy < ny:
            out.append((jx, jy))
    return out

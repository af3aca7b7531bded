"""Point cloud container, file I/O, downsampling and cluster denoising.

Clouds are plain (N, 3) float64 arrays wrapped in a small immutable
container that caches the axis-aligned bounds. Readers accept PLY
(ASCII and binary little-endian), PCD (ASCII) and whitespace-separated
XYZ text; non-coordinate attributes are dropped on load. Points with
NaN or infinite coordinates are rejected and counted, never kept.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import CloudParseError, EmptyCloudError

FORMATS = ("ply_ascii", "ply_binary_le", "pcd_ascii", "xyz_text")

_EXTENSION_FORMATS = {".ply": "ply_ascii", ".pcd": "pcd_ascii", ".xyz": "xyz_text", ".txt": "xyz_text"}


@dataclass(frozen=True)
class PointCloud:
    """Immutable set of 3D points in meters with cached bounds."""

    points: np.ndarray
    bounds: tuple[np.ndarray, np.ndarray] = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        if pts.size and not np.isfinite(pts).all():
            raise ValueError("points must be finite")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if len(pts):
            lo, hi = pts.min(axis=0), pts.max(axis=0)
        else:
            lo = hi = np.zeros(3)
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "bounds", (lo, hi))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )


@dataclass
class LoadResult:
    cloud: PointCloud
    rejected: int  # points dropped for NaN/inf coordinates


def _finite_filter(pts: np.ndarray) -> tuple[np.ndarray, int]:
    mask = np.isfinite(pts).all(axis=1)
    return pts[mask], int(len(pts) - mask.sum())


def _parse_float_rows(lines, n_cols_min, path, offset_of):
    rows = []
    for i, line in enumerate(lines):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) < n_cols_min:
            raise CloudParseError(
                f"expected at least {n_cols_min} columns, got {len(parts)}",
                path=path,
                offset=offset_of(i),
            )
        try:
            rows.append([float(parts[0]), float(parts[1]), float(parts[2])])
        except ValueError:
            # Tokens like "nan"/"inf" parse fine; anything else is malformed.
            raise CloudParseError(
                f"non-numeric coordinate in line {i + 1!r}",
                path=path,
                offset=offset_of(i),
            ) from None
    return np.asarray(rows, dtype=np.float64).reshape(-1, 3)


def _load_xyz(path: Path) -> tuple[np.ndarray, int]:
    text = path.read_text()
    lines = text.splitlines()
    offsets = []
    pos = 0
    for line in lines:
        offsets.append(pos)
        pos += len(line) + 1
    pts = _parse_float_rows(lines, 3, path, lambda i: offsets[i])
    return _finite_filter(pts)


def _read_ply_header(data: bytes, path):
    if not data.startswith(b"ply"):
        raise CloudParseError("missing 'ply' magic", path=path, offset=0)
    end = data.find(b"end_header")
    if end < 0:
        raise CloudParseError("missing 'end_header'", path=path, offset=len(data))
    header_end = data.find(b"\n", end)
    if header_end < 0:
        raise CloudParseError("unterminated header", path=path, offset=end)
    header = data[:header_end].decode("ascii", errors="replace")
    fmt = None
    n_vertices = None
    props = []  # (name, type) of the vertex element
    in_vertex = False
    offset = 0
    for line in header.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "format":
            fmt = tokens[1]
        elif tokens[0] == "element":
            in_vertex = tokens[1] == "vertex"
            if in_vertex:
                try:
                    n_vertices = int(tokens[2])
                except (IndexError, ValueError):
                    raise CloudParseError(
                        "bad vertex element line", path=path, offset=offset
                    ) from None
        elif tokens[0] == "property" and in_vertex:
            if tokens[1] == "list":
                raise CloudParseError(
                    "list property on vertex element is unsupported",
                    path=path,
                    offset=offset,
                )
            props.append((tokens[2], tokens[1]))
        offset += len(line) + 1
    if fmt is None or n_vertices is None:
        raise CloudParseError("header lacks format or vertex element", path=path, offset=0)
    return fmt, n_vertices, props, header_end + 1


_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _load_ply(path: Path, binary: bool) -> tuple[np.ndarray, int]:
    data = path.read_bytes()
    fmt, n_vertices, props, body_start = _read_ply_header(data, path)
    names = [p[0] for p in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise CloudParseError(f"vertex element lacks '{axis}' property", path=path, offset=0)
    if binary:
        if fmt != "binary_little_endian":
            raise CloudParseError(
                f"expected binary_little_endian, header says {fmt!r}", path=path, offset=0
            )
        dtype = np.dtype([(name, "<" + _PLY_TYPES[t]) for name, t in props])
        need = dtype.itemsize * n_vertices
        if len(data) - body_start < need:
            raise CloudParseError(
                f"body truncated: need {need} bytes, have {len(data) - body_start}",
                path=path,
                offset=body_start,
            )
        rec = np.frombuffer(data, dtype=dtype, count=n_vertices, offset=body_start)
        pts = np.stack(
            [rec["x"].astype(np.float64), rec["y"].astype(np.float64), rec["z"].astype(np.float64)],
            axis=1,
        )
    else:
        if fmt != "ascii":
            raise CloudParseError(f"expected ascii, header says {fmt!r}", path=path, offset=0)
        body = data[body_start:].decode("ascii", errors="replace")
        lines = [ln for ln in body.splitlines() if ln.strip()]
        if len(lines) < n_vertices:
            raise CloudParseError(
                f"body has {len(lines)} vertex lines, header declares {n_vertices}",
                path=path,
                offset=body_start,
            )
        ix, iy, iz = names.index("x"), names.index("y"), names.index("z")
        rows = np.empty((n_vertices, 3), dtype=np.float64)
        for i in range(n_vertices):
            parts = lines[i].split()
            if len(parts) < len(names):
                raise CloudParseError(
                    f"vertex line {i} has {len(parts)} fields, expected {len(names)}",
                    path=path,
                    offset=body_start,
                )
            rows[i] = (float(parts[ix]), float(parts[iy]), float(parts[iz]))
        pts = rows
    return _finite_filter(pts)


def _load_pcd(path: Path) -> tuple[np.ndarray, int]:
    text = path.read_bytes().decode("ascii", errors="replace")
    lines = text.splitlines()
    fields = None
    n_points = None
    data_kind = None
    body_index = None
    offset = 0
    for i, line in enumerate(lines):
        tokens = line.split()
        if tokens:
            key = tokens[0].upper()
            if key == "FIELDS":
                fields = tokens[1:]
            elif key == "POINTS":
                n_points = int(tokens[1])
            elif key == "DATA":
                data_kind = tokens[1] if len(tokens) > 1 else None
                body_index = i + 1
                offset += len(line) + 1
                break
        offset += len(line) + 1
    if fields is None or n_points is None or data_kind is None:
        raise CloudParseError("PCD header lacks FIELDS/POINTS/DATA", path=path, offset=offset)
    if data_kind != "ascii":
        raise CloudParseError(f"only DATA ascii supported, got {data_kind!r}", path=path, offset=offset)
    for axis in ("x", "y", "z"):
        if axis not in fields:
            raise CloudParseError(f"PCD lacks field '{axis}'", path=path, offset=0)
    ix, iy, iz = fields.index("x"), fields.index("y"), fields.index("z")
    body = [ln for ln in lines[body_index:] if ln.strip()]
    if len(body) < n_points:
        raise CloudParseError(
            f"PCD body has {len(body)} rows, header declares {n_points}",
            path=path,
            offset=offset,
        )
    pts = np.empty((n_points, 3), dtype=np.float64)
    for i in range(n_points):
        parts = body[i].split()
        pts[i] = (float(parts[ix]), float(parts[iy]), float(parts[iz]))
    return _finite_filter(pts)


def load_cloud(path, format: str | None = None) -> LoadResult:
    """Read a cloud file; returns the cloud plus the rejected-point count.

    ``format`` is one of FORMATS, or None to infer from the extension
    (PLY files are sniffed for ascii vs binary).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format is None:
        format = _EXTENSION_FORMATS.get(path.suffix.lower())
        if format is None:
            raise CloudParseError(f"cannot infer format from suffix {path.suffix!r}", path=path)
        if format == "ply_ascii":
            head = path.read_bytes()[:512]
            if b"binary_little_endian" in head:
                format = "ply_binary_le"
    if format == "xyz_text":
        pts, rejected = _load_xyz(path)
    elif format == "ply_ascii":
        pts, rejected = _load_ply(path, binary=False)
    elif format == "ply_binary_le":
        pts, rejected = _load_ply(path, binary=True)
    elif format == "pcd_ascii":
        pts, rejected = _load_pcd(path)
    else:
        raise ValueError(f"unknown format {format!r}")
    if len(pts) == 0:
        raise EmptyCloudError(f"{path}: no valid points")
    return LoadResult(cloud=PointCloud(pts), rejected=rejected)


def write_cloud(cloud: PointCloud, path, format: str = "ply_ascii", decimals: int = 6) -> None:
    """Write a cloud; ASCII formats use a fixed decimal precision."""
    path = Path(path)
    pts = cloud.points
    fmt_one = f"{{:.{decimals}f}}"
    if format == "xyz_text":
        with open(path, "w") as f:
            for p in pts:
                f.write(f"{fmt_one.format(p[0])} {fmt_one.format(p[1])} {fmt_one.format(p[2])}\n")
    elif format == "ply_ascii":
        with open(path, "w") as f:
            f.write("ply\nformat ascii 1.0\n")
            f.write(f"element vertex {len(pts)}\n")
            f.write("property double x\nproperty double y\nproperty double z\n")
            f.write("end_header\n")
            for p in pts:
                f.write(f"{fmt_one.format(p[0])} {fmt_one.format(p[1])} {fmt_one.format(p[2])}\n")
    elif format == "ply_binary_le":
        with open(path, "wb") as f:
            header = (
                "ply\nformat binary_little_endian 1.0\n"
                f"element vertex {len(pts)}\n"
                "property double x\nproperty double y\nproperty double z\n"
                "end_header\n"
            )
            f.write(header.encode("ascii"))
            f.write(struct.pack(f"<{3 * len(pts)}d", *pts.reshape(-1)))
    elif format == "pcd_ascii":
        with open(path, "w") as f:
            f.write("VERSION .7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n")
            f.write(f"WIDTH {len(pts)}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n")
            f.write(f"POINTS {len(pts)}\nDATA ascii\n")
            for p in pts:
                f.write(f"{fmt_one.format(p[0])} {fmt_one.format(p[1])} {fmt_one.format(p[2])}\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def voxel_downsample(cloud: PointCloud, cell: float, anchor=None) -> PointCloud:
    """Collapse points to one centroid per occupied cell of a cubic lattice.

    The lattice is anchored at the cloud's min corner unless ``anchor``
    is given, which makes repeated application with the same anchor a
    no-op on its own output.
    """
    if cell <= 0:
        raise ValueError("cell must be positive")
    pts = cloud.points
    if len(pts) == 0:
        return cloud
    anchor = cloud.bounds[0] if anchor is None else np.asarray(anchor, dtype=np.float64)
    idx = np.floor((pts - anchor) / cell).astype(np.int64)
    # group points by cell, deterministic output order: lexicographic cell index
    order = np.lexsort((idx[:, 2], idx[:, 1], idx[:, 0]))
    idx_sorted = idx[order]
    pts_sorted = pts[order]
    boundary = np.ones(len(pts), dtype=bool)
    boundary[1:] = (idx_sorted[1:] != idx_sorted[:-1]).any(axis=1)
    group = np.cumsum(boundary) - 1
    n_groups = int(group[-1]) + 1
    sums = np.zeros((n_groups, 3), dtype=np.float64)
    np.add.at(sums, group, pts_sorted)
    counts = np.bincount(group, minlength=n_groups).astype(np.float64)
    return PointCloud(sums / counts[:, None])


def denoise_clusters(cloud: PointCloud, link_dist: float = 0.20, min_points: int = 100) -> PointCloud:
    """Drop small connected components under the dist <= link_dist relation.

    Exact single-linkage semantics: a KD-tree supplies every point pair
    within link_dist and sparse connected components give the labels, so
    the result matches the naive O(n^2) clustering bit for bit.
    """
    if link_dist <= 0:
        raise ValueError("link_dist must be positive")
    if min_points < 1:
        raise ValueError("min_points must be >= 1")
    pts = cloud.points
    n = len(pts)
    if n == 0:
        return cloud
    tree = cKDTree(pts)
    pairs = tree.query_pairs(link_dist, output_type="ndarray")
    if len(pairs):
        ones = np.ones(len(pairs), dtype=np.int8)
        graph = coo_matrix((ones, (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        _, labels = connected_components(graph, directed=False)
    else:
        labels = np.arange(n)
    sizes = np.bincount(labels)
    keep = sizes[labels] >= min_points
    return PointCloud(pts[keep])

"""Contact surfaces between volumes and the volume-level graph.

Wherever two 4-adjacent columns belong to different volumes and overlap
in z, the shared vertical voxel faces form contact surface candidates.
Per volume pair the face corner points are clustered by distance, one
cluster per physical opening, and every cluster becomes a graph edge
annotated with its quad mesh. Because columns are maximal vertical
runs, two volumes can never meet across a horizontal face; every
passage is a vertical surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .columns import ColumnField
from .volumes import Volume


@dataclass(frozen=True)
class Passage:
    """Mesh annotation of one graph edge.

    ``pair`` holds the ids of the two joined vertices: volume ids at
    the volume level, region ids after lifting.

    Points are grid-corner indices (multiply by voxel and add the grid
    origin for meters); quads index into points, four corners each.
    """

    pair: tuple[int, int]  # (i, j) with i < j
    points: np.ndarray            # (P, 3) int64 grid corner coordinates
    quads: np.ndarray             # (Q, 4) indices into points

    def points_metric(self, origin, voxel) -> np.ndarray:
        return np.asarray(origin) + self.points * voxel

    def area_m2(self, voxel: float) -> float:
        return len(self.quads) * voxel ** 2


@dataclass
class VolumeGraph:
    volumes: list[Volume]
    edges: list[Passage]  # multigraph: several passages may join one pair

    def edges_between(self, i: int, j: int) -> list[Passage]:
        pair = (min(i, j), max(i, j))
        return [e for e in self.edges if e.pair == pair]

    def neighbor_ids(self, i: int) -> set[int]:
        out = set()
        for e in self.edges:
            a, b = e.pair
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out


def cluster_contact_points(points: np.ndarray, d_th: float) -> list[np.ndarray]:
    """Single-linkage clusters under strict euclidean distance < d_th.

    Frontier expansion over the "closer than d_th" relation; the
    component structure is order-free, and returned clusters are sorted
    by their lexicographically smallest member for reproducibility.
    """
    if d_th <= 0:
        raise ValueError("d_th must be positive")
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n == 0:
        return []
    tree = cKDTree(points)
    pairs = tree.query_pairs(d_th, output_type="ndarray")
    if len(pairs):
        d = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
        pairs = pairs[d < d_th]  # strict inequality
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    clusters = {}
    for i, r in enumerate(roots):
        clusters.setdefault(int(r), []).append(i)
    member_lists = [np.asarray(v) for v in clusters.values()]
    order = sorted(
        range(len(member_lists)),
        key=lambda k: tuple(points[member_lists[k]].min(axis=0)),
    )
    return [member_lists[k] for k in order]


def _face_corners(face: tuple[int, int, int, int]) -> np.ndarray:
    """Grid corner points of one shared vertical voxel face.

    A face record is (axis, a, b, z): axis 0 separates cells along x
    with the plane at grid line a and cell y index b; axis 1 separates
    along y with the plane at grid line b and cell x index a.
    """
    axis, a, b, z = face
    if axis == 0:
        return np.array(
            [(a, b, z), (a, b + 1, z), (a, b, z + 1), (a, b + 1, z + 1)], dtype=np.int64
        )
    return np.array(
        [(a, b, z), (a + 1, b, z), (a, b, z + 1), (a + 1, b, z + 1)], dtype=np.int64
    )


def _passages_from_faces(faces: list[tuple], pair, voxel: float, d_th: float) -> list[Passage]:
    """Cluster a volume pair's face corners and emit one passage per cluster."""
    return _passages_from_corner_sets([_face_corners(f) for f in faces], pair, voxel, d_th)


def _passages_from_corner_sets(
    corner_sets: list[np.ndarray], pair, voxel: float, d_th: float
) -> list[Passage]:
    """Build passages from quads given as (4, 3) corner-coordinate arrays."""
    all_pts = np.unique(np.vstack(corner_sets), axis=0)
    clusters = cluster_contact_points(all_pts * voxel, d_th)
    point_cluster = {}
    for k, members in enumerate(clusters):
        for m in members:
            point_cluster[tuple(all_pts[m])] = k
    quads_per_cluster: dict[int, list[np.ndarray]] = {}
    for corners in corner_sets:
        # a quad follows its lexicographically smallest corner
        min_corner = min(tuple(c) for c in corners)
        quads_per_cluster.setdefault(point_cluster[min_corner], []).append(corners)
    out = []
    for k in sorted(quads_per_cluster):
        quad_corners = quads_per_cluster[k]
        pts = np.unique(np.vstack(quad_corners), axis=0)
        index = {tuple(p): i for i, p in enumerate(pts)}
        quads = np.array(
            sorted(tuple(index[tuple(c)] for c in corners) for corners in quad_corners),
            dtype=np.int64,
        )
        out.append(Passage(pair=pair, points=pts, quads=quads))
    return out


def generate_passages(
    field: ColumnField, volume_ids: np.ndarray, d_th: float
) -> list[Passage]:
    """Edges of the volume graph: one passage per contact-surface cluster.

    volume_ids maps each column (by field index) to its volume; columns
    of the same volume contribute nothing. d_th controls how far apart
    two openings must be to count as separate passages.
    """
    cols = field.columns
    cell_index = field.cell_index()
    faces: dict[tuple[int, int], list[tuple]] = {}
    for i in range(len(cols)):
        ix, iy = int(cols[i]["ix"]), int(cols[i]["iy"])
        z1, z2 = int(cols[i]["z1"]), int(cols[i]["z2"])
        vi = int(volume_ids[i])
        for dx, dy in ((1, 0), (0, 1)):
            for j in cell_index.get((ix + dx, iy + dy), ()):
                vj = int(volume_ids[j])
                if vi == vj:
                    continue
                z_lo = max(z1, int(cols[j]["z1"]))
                z_hi = min(z2, int(cols[j]["z2"]))
                if z_lo > z_hi:
                    continue
                pair = (min(vi, vj), max(vi, vj))
                bucket = faces.setdefault(pair, [])
                if dx == 1:
                    bucket.extend((0, ix + 1, iy, z) for z in range(z_lo, z_hi + 1))
                else:
                    bucket.extend((1, ix, iy + 1, z) for z in range(z_lo, z_hi + 1))
    edges = []
    for pair in sorted(faces):
        edges.extend(_passages_from_faces(faces[pair], pair, field.voxel, d_th))
    return edges


def build_volume_graph(
    field: ColumnField, volumes: list[Volume], volume_ids: np.ndarray, d_th: float
) -> VolumeGraph:
    return VolumeGraph(volumes=volumes, edges=generate_passages(field, volume_ids, d_th))

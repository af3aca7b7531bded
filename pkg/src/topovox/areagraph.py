"""2D segmentation of a region's footprint: skeleton, areas, alpha merge.

Large regions are cut horizontally by projecting their columns onto a
2D grid map and segmenting that map along its topological structure:

1. a discrete Voronoi skeleton marks free cells whose two nearest,
   mutually non-adjacent occupied cells lie at (almost) equal distance;
2. the skeleton decomposes into a topology graph of junction/dead-end
   vertices and degree-2 chains, with short spur branches pruned;
3. every free cell joins the area of its nearest chain, and area pairs
   sharing enough boundary get a passage;
4. closed alpha-shape outlines over the occupied cells detect wide
   pockets (rooms) and merge every area they enclose, undoing the
   oversegmentation that skeleton junctions cause inside big rooms.

All constants here are deliberate realization choices of the above and
are exposed as keyword arguments with conservative defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .columns import ColumnField

DEFAULT_PRUNE_LEN = 4           # cells: spur chains shorter than this vanish
DEFAULT_MIN_PASSAGE_SEGMENTS = 2  # boundary segments needed to call it a passage

_STRUCTURE8 = np.ones((3, 3), dtype=bool)
_STRUCTURE4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


# ---------------------------------------------------------------------------
# 2D grid map projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridMap2D:
    """Region footprint: free where a column exists, occupied elsewhere.

    Cells use the same (ix, iy) axis convention as the 3D grid;
    ``offset`` maps local cell (0, 0) back into the storey grid.
    """

    free: np.ndarray  # bool (nx, ny)
    resolution: float
    offset: tuple[int, int]

    @property
    def shape(self) -> tuple[int, int]:
        return self.free.shape


def project_region(field: ColumnField, column_indices) -> GridMap2D:
    """All-occupied map with the region's column cells marked free,
    cropped to the region bounds plus a one-cell occupied border."""
    idx = np.asarray(column_indices)
    if len(idx) == 0:
        raise ValueError("region has no columns")
    cols = field.columns[idx]
    x_lo, x_hi = int(cols["ix"].min()), int(cols["ix"].max())
    y_lo, y_hi = int(cols["iy"].min()), int(cols["iy"].max())
    free = np.zeros((x_hi - x_lo + 3, y_hi - y_lo + 3), dtype=bool)
    free[cols["ix"] - x_lo + 1, cols["iy"] - y_lo + 1] = True
    return GridMap2D(free=free, resolution=field.voxel, offset=(x_lo - 1, y_lo - 1))


# ---------------------------------------------------------------------------
# discrete Voronoi skeleton
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VoronoiDiagram2D:
    """Waypoint cells with their two nearest mutually non-adjacent sites."""

    cells: np.ndarray   # (W, 2) int, lex sorted
    site1: np.ndarray   # (W, 2) nearest occupied cell (lex-smallest on ties)
    site2: np.ndarray   # (W, 2) nearest occupied cell not 8-adjacent to site1
    dist1: np.ndarray   # meters
    dist2: np.ndarray   # meters
    shape: tuple[int, int]

    def __len__(self):
        return len(self.cells)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        if len(self.cells):
            m[self.cells[:, 0], self.cells[:, 1]] = True
        return m


def voronoi(gmap: GridMap2D, chunk: int = 2048) -> VoronoiDiagram2D:
    """Mark free cells whose two nearest walls are separate and equidistant.

    For every free cell take the nearest occupied cell and the second
    nearest (ties resolve to the lexicographically smaller cell). The
    cell is a waypoint when those two sites are not 8-adjacent to each
    other (adjacent sites are the same wall) and their distances agree
    within half a cell, i.e. resolution/2 in meters.
    """
    free_cells = np.argwhere(gmap.free)
    occ_cells = np.argwhere(~gmap.free)  # argwhere yields lex order
    if len(free_cells) == 0 or len(occ_cells) < 2:
        empty = np.zeros((0, 2), dtype=np.int64)
        return VoronoiDiagram2D(
            cells=empty, site1=empty, site2=empty,
            dist1=np.zeros(0), dist2=np.zeros(0), shape=gmap.shape,
        )
    big = np.iinfo(np.int64).max
    keep_cells, keep_s1, keep_s2, keep_d1, keep_d2 = [], [], [], [], []
    for lo in range(0, len(free_cells), chunk):
        fc = free_cells[lo : lo + chunk]
        diff = fc[:, None, :] - occ_cells[None, :, :]
        d2 = (diff * diff).sum(axis=2)  # squared cell distances, exact ints
        rows = np.arange(len(fc))
        j1 = d2.argmin(axis=1)  # first minimum = lex-smallest site
        s1 = occ_cells[j1]
        d1sq = d2[rows, j1]
        d2[rows, j1] = big
        j2 = d2.argmin(axis=1)
        s2 = occ_cells[j2]
        d2sq = d2[rows, j2]
        separate = (np.abs(s1[:, 0] - s2[:, 0]) > 1) | (np.abs(s1[:, 1] - s2[:, 1]) > 1)
        close = np.sqrt(d2sq.astype(float)) - np.sqrt(d1sq.astype(float)) <= 0.5
        is_wp = separate & close
        keep_cells.append(fc[is_wp])
        keep_s1.append(s1[is_wp])
        keep_s2.append(s2[is_wp])
        keep_d1.append(np.sqrt(d1sq[is_wp].astype(float)) * gmap.resolution)
        keep_d2.append(np.sqrt(d2sq[is_wp].astype(float)) * gmap.resolution)
    return VoronoiDiagram2D(
        cells=np.vstack(keep_cells).astype(np.int64),
        site1=np.vstack(keep_s1).astype(np.int64),
        site2=np.vstack(keep_s2).astype(np.int64),
        dist1=np.concatenate(keep_d1),
        dist2=np.concatenate(keep_d2),
        shape=gmap.shape,
    )


# ---------------------------------------------------------------------------
# topology graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TopoVertex2D:
    id: int
    kind: str  # "junction" | "dead_end" | "room"
    cells: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class TopoEdge2D:
    id: int
    v_a: int
    v_b: int
    chain: tuple[tuple[int, int], ...]  # ordered cells, junction cells excluded


@dataclass
class TopologyGraph2D:
    vertices: list[TopoVertex2D]
    edges: list[TopoEdge2D]
    shape: tuple[int, int]


def _degree_map(mask: np.ndarray) -> np.ndarray:
    deg = np.zeros(mask.shape, dtype=np.int8)
    padded = np.pad(mask, 1)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            deg += padded[1 + dx : 1 + dx + mask.shape[0], 1 + dy : 1 + dy + mask.shape[1]]
    deg[~mask] = 0
    return deg


def _order_component(cells: list[tuple[int, int]]) -> tuple[list[tuple[int, int]], bool]:
    """Order a degree<=2 component into a path (or cycle) of cells."""
    if len(cells) == 1:
        return list(cells), False
    cell_set = set(cells)
    nbrs = {}
    for (x, y) in cells:
        n = [
            (x + dx, y + dy)
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            if (dx or dy) and (x + dx, y + dy) in cell_set
        ]
        nbrs[(x, y)] = sorted(n)
    ends = sorted(c for c in cells if len(nbrs[c]) <= 1)
    is_cycle = not ends
    start = min(cells) if is_cycle else ends[0]
    order = [start]
    seen = {start}
    cur = start
    while True:
        nxt = [n for n in nbrs[cur] if n not in seen]
        if not nxt:
            break
        cur = nxt[0]
        order.append(cur)
        seen.add(cur)
    return order, is_cycle


def _decompose(mask: np.ndarray):
    """Split a skeleton mask into junction components and chain components."""
    deg = _degree_map(mask)
    junction_mask = mask & (deg >= 3)
    j_labels, n_j = ndimage.label(junction_mask, structure=_STRUCTURE8)
    chain_mask = mask & ~junction_mask
    c_labels, n_c = ndimage.label(chain_mask, structure=_STRUCTURE8)
    junction_comps = [
        [tuple(c) for c in np.argwhere(j_labels == k)] for k in range(1, n_j + 1)
    ]
    chain_comps = [
        [tuple(c) for c in np.argwhere(c_labels == k)] for k in range(1, n_c + 1)
    ]
    return junction_comps, chain_comps, j_labels


def _adjacent_junctions(cell, j_labels) -> list[int]:
    """All junction component labels 8-adjacent to a cell, ascending."""
    x, y = cell
    out = set()
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            jx, jy = x + dx, y + dy
            if 0 <= jx < j_labels.shape[0] and 0 <= jy < j_labels.shape[1]:
                lab = int(j_labels[jx, jy])
                if lab:
                    out.add(lab)
    return sorted(out)


def topology_graph(
    vd: VoronoiDiagram2D, prune_len: int = DEFAULT_PRUNE_LEN
) -> TopologyGraph2D:
    """Prune short spurs, then decompose the skeleton into vertices and edges.

    A spur is a chain hanging off a junction with a loose end; spurs
    shorter than prune_len cells are noise from wall roughness and map
    corners and are removed iteratively until the graph is stable.
    Isolated chains (loose at both ends) always survive.
    """
    mask = vd.mask()
    while True:
        _, chain_comps, j_labels = _decompose(mask)
        to_remove = []
        for comp in chain_comps:
            order, is_cycle = _order_component(comp)
            if is_cycle or len(order) >= prune_len:
                continue
            attachments = set(_adjacent_junctions(order[0], j_labels))
            attachments |= set(_adjacent_junctions(order[-1], j_labels))
            if len(attachments) == 1:  # loose on one side only: a spur
                to_remove.append(order)
        if not to_remove:
            break
        for order in to_remove:
            for (x, y) in order:
                mask[x, y] = False

    junction_comps, chain_comps, j_labels = _decompose(mask)

    # raw edges: ordered chain plus junction attachment (or None) per end;
    # cycles close on themselves at their anchor cell
    edges_raw = []  # (order, att_a, att_b, is_cycle)
    vertex_seeds = []  # (sort key cell, kind, cells, junction label or None)
    for k, comp in enumerate(junction_comps, start=1):
        vertex_seeds.append((min(comp), "junction", tuple(sorted(comp)), k))
    for comp in chain_comps:
        order, is_cycle = _order_component(comp)
        if is_cycle:
            vertex_seeds.append((order[0], "room", (order[0],), None))
            edges_raw.append((order, None, None, True))
            continue
        if len(order) == 1:
            labs = _adjacent_junctions(order[0], j_labels)
            if len(labs) >= 2:  # one cell bridging two junction components
                edges_raw.append((order, labs[0], labs[1], False))
            elif len(labs) == 1:
                vertex_seeds.append((order[0], "dead_end", (order[0],), None))
                edges_raw.append((order, labs[0], None, False))
            else:
                vertex_seeds.append((order[0], "room", (order[0],), None))
                edges_raw.append((order, None, None, False))
            continue
        labs_a = _adjacent_junctions(order[0], j_labels)
        labs_b = _adjacent_junctions(order[-1], j_labels)
        if not labs_a:
            vertex_seeds.append((order[0], "dead_end", (order[0],), None))
        if not labs_b:
            vertex_seeds.append((order[-1], "dead_end", (order[-1],), None))
        edges_raw.append(
            (order, labs_a[0] if labs_a else None, labs_b[0] if labs_b else None, False)
        )

    # junction components touching each other directly still share an edge
    junction_adjacency = set()
    for k, comp in enumerate(junction_comps, start=1):
        for cell in comp:
            for other in _adjacent_junctions(cell, j_labels):
                if other != k:
                    junction_adjacency.add((min(k, other), max(k, other)))

    vertex_seeds.sort(key=lambda t: t[0])
    vertices = []
    vertex_of_junction: dict[int, int] = {}
    vertex_of_cell: dict[tuple[int, int], int] = {}
    for _, kind, cells, j_id in vertex_seeds:
        vid = len(vertices)
        vertices.append(TopoVertex2D(id=vid, kind=kind, cells=cells))
        if j_id is not None:
            vertex_of_junction[j_id] = vid
        else:
            vertex_of_cell[cells[0]] = vid

    def end_vertex(attachment, cell):
        if attachment is not None:
            return vertex_of_junction[attachment]
        return vertex_of_cell[cell]

    edge_items = []
    for order, att_a, att_b, is_cycle in edges_raw:
        va = end_vertex(att_a, order[0])
        vb = va if is_cycle else end_vertex(att_b, order[-1])
        if order[-1] < order[0]:
            order = order[::-1]
            va, vb = vb, va
        edge_items.append((tuple(order), va, vb))
    for a, b in sorted(junction_adjacency):
        edge_items.append(((), vertex_of_junction[a], vertex_of_junction[b]))

    edge_items.sort(key=lambda t: (not t[0], t[0][0] if t[0] else (-1, -1), t[1], t[2]))
    edges = [
        TopoEdge2D(id=i, v_a=va, v_b=vb, chain=chain)
        for i, (chain, va, vb) in enumerate(edge_items)
    ]
    return TopologyGraph2D(vertices=vertices, edges=edges, shape=vd.shape)


# ---------------------------------------------------------------------------
# area graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Area:
    id: int
    cells: np.ndarray  # (N, 2) int, lex sorted


@dataclass(frozen=True)
class AreaPassage2D:
    pair: tuple[int, int]
    segments: np.ndarray  # (S, 2, 2) grid-corner endpoints


@dataclass
class AreaGraph2D:
    areas: list[Area]
    passages: list[AreaPassage2D]
    labels: np.ndarray  # (nx, ny), -1 occupied, else area id
    resolution: float
    offset: tuple[int, int]


def _label_free_cells(tg: TopologyGraph2D, gmap: GridMap2D, chunk: int = 4096) -> np.ndarray:
    """Assign every free cell to the edge with the nearest chain waypoint.

    Junction vertex cells belong to no chain (they are shared between
    edges), so they are labeled like any other free cell. Ties resolve
    to the smallest edge id: chain cells are laid out in edge-id order
    and argmin returns the first minimum.
    """
    labels = np.full(gmap.shape, -1, dtype=np.int64)
    chain_cells = []
    chain_edge = []
    for e in tg.edges:
        for c in e.chain:
            chain_cells.append(c)
            chain_edge.append(e.id)
    free_cells = np.argwhere(gmap.free)
    if not chain_cells:
        labels[gmap.free] = 0
        return labels
    chain_cells = np.asarray(chain_cells, dtype=np.int64)
    chain_edge = np.asarray(chain_edge, dtype=np.int64)
    for lo in range(0, len(free_cells), chunk):
        fc = free_cells[lo : lo + chunk]
        diff = fc[:, None, :] - chain_cells[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        nearest = d2.argmin(axis=1)
        labels[fc[:, 0], fc[:, 1]] = chain_edge[nearest]
    return labels


def _boundary_segments(labels: np.ndarray):
    """4-adjacent cell pairs with different labels -> shared segments per pair.

    Returns {(label_a, label_b): [((x, y), (x2, y2)), ...]} with grid
    corner coordinates; only free-free boundaries count.
    """
    out: dict[tuple[int, int], list] = {}
    nx, ny = labels.shape
    a = labels[:-1, :]
    b = labels[1:, :]
    for x, y in np.argwhere((a != b) & (a >= 0) & (b >= 0)):
        pair = (min(int(a[x, y]), int(b[x, y])), max(int(a[x, y]), int(b[x, y])))
        # vertical segment on the grid line between cell (x,y) and (x+1,y)
        out.setdefault(pair, []).append(((x + 1, y), (x + 1, y + 1)))
    a = labels[:, :-1]
    b = labels[:, 1:]
    for x, y in np.argwhere((a != b) & (a >= 0) & (b >= 0)):
        pair = (min(int(a[x, y]), int(b[x, y])), max(int(a[x, y]), int(b[x, y])))
        out.setdefault(pair, []).append(((x, y + 1), (x + 1, y + 1)))
    return out


def _relabel_compact(labels: np.ndarray) -> np.ndarray:
    """Renumber labels to 0..n-1 in order of first appearance (lex cell order)."""
    out = np.full_like(labels, -1)
    mapping: dict[int, int] = {}
    for x, y in np.argwhere(labels >= 0):
        lab = int(labels[x, y])
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[x, y] = mapping[lab]
    return out


def _graph_from_labels(
    labels: np.ndarray, gmap: GridMap2D, min_passage_segments: int
) -> AreaGraph2D:
    labels = _relabel_compact(labels)
    n = int(labels.max()) + 1 if (labels >= 0).any() else 0
    areas = [
        Area(id=k, cells=np.argwhere(labels == k).astype(np.int64)) for k in range(n)
    ]
    passages = []
    for pair, segs in sorted(_boundary_segments(labels).items()):
        if len(segs) < min_passage_segments:
            continue
        passages.append(
            AreaPassage2D(pair=pair, segments=np.asarray(sorted(segs), dtype=np.int64))
        )
    return AreaGraph2D(
        areas=areas,
        passages=passages,
        labels=labels,
        resolution=gmap.resolution,
        offset=gmap.offset,
    )


def area_graph(
    tg: TopologyGraph2D,
    gmap: GridMap2D,
    min_passage_segments: int = DEFAULT_MIN_PASSAGE_SEGMENTS,
) -> AreaGraph2D:
    """Partition free cells into per-edge areas and link adjacent areas.

    Single-cell contacts between areas (unavoidable at skeleton
    junctions) stay passage-free; a passage needs at least
    min_passage_segments shared boundary segments.
    """
    labels = _label_free_cells(tg, gmap)
    return _graph_from_labels(labels, gmap, min_passage_segments)


# ---------------------------------------------------------------------------
# alpha shape
# ---------------------------------------------------------------------------

def alpha_shape_edges(points: np.ndarray, alpha: float) -> np.ndarray:
    """Index pairs joined by an empty circle of diameter alpha.

    Both circles through a pair are tested; an edge appears when at
    least one contains no third point strictly inside (a point exactly
    on the circle does not block). Matches the naive all-pairs test.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < 2 or alpha <= 0:
        return np.zeros((0, 2), dtype=np.int64)
    radius = alpha / 2.0
    tree = cKDTree(points)
    pairs = tree.query_pairs(alpha, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    edges = []
    for i, j in pairs:
        p, q = points[i], points[j]
        mid = (p + q) / 2.0
        half = np.linalg.norm(q - p) / 2.0
        h_sq = radius * radius - half * half
        if h_sq < 0:
            continue
        h = np.sqrt(h_sq)
        d = (q - p) / (2.0 * half)  # unit direction
        normal = np.array([-d[1], d[0]])
        for center in (mid + h * normal, mid - h * normal):
            nearby = tree.query_ball_point(center, radius * (1 + 1e-12))
            blocked = False
            for k in nearby:
                if k == i or k == j:
                    continue
                if np.linalg.norm(points[k] - center) < radius - 1e-9:
                    blocked = True
                    break
            if not blocked:
                edges.append((int(i), int(j)))
                break
    if not edges:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(sorted(edges), dtype=np.int64)


def alpha_shape_merge(
    ag: AreaGraph2D,
    gmap: GridMap2D,
    alpha: float,
    min_passage_segments: int = DEFAULT_MIN_PASSAGE_SEGMENTS,
    warnings: list | None = None,
) -> AreaGraph2D:
    """Merge all areas that share one wide free pocket (a room).

    A closed alpha outline forms exactly around free space that can
    host an empty circle of diameter alpha, and cannot form along
    corridors narrower than alpha: that is what makes alpha "bigger
    than the corridor, smaller than the room" the selection rule. The
    outline interiors are therefore realized directly as the connected
    components of free cells with wall clearance of at least alpha/2;
    every such pocket merges all areas it touches. Alpha below two cell
    widths cannot enclose anything, so the merge degrades to a warning
    no-op.
    """
    if alpha < 2 * gmap.resolution:
        if warnings is not None:
            warnings.append(
                f"alpha={alpha} below twice the resolution {gmap.resolution}; "
                "alpha-shape merge skipped"
            )
        return ag
    if not ag.areas or (~gmap.free).sum() < 2:
        return ag
    clearance = ndimage.distance_transform_edt(gmap.free, sampling=gmap.resolution)
    core = gmap.free & (clearance >= alpha / 2.0 - 1e-9)
    pockets, n_pockets = ndimage.label(core, structure=_STRUCTURE4)
    if n_pockets == 0:
        return ag
    parent = list(range(len(ag.areas)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for k in range(1, n_pockets + 1):
        touched = np.unique(ag.labels[(pockets == k) & (ag.labels >= 0)])
        if len(touched) > 1:
            root = find(int(touched[0]))
            for t in touched[1:]:
                rt = find(int(t))
                if rt != root:
                    parent[max(root, rt)] = min(root, rt)
                    root = min(root, rt)
    merged = ag.labels.copy()
    pos = merged >= 0
    merged[pos] = [find(int(v)) for v in merged[pos]]
    return _graph_from_labels(merged, gmap, min_passage_segments)


# ---------------------------------------------------------------------------
# region subdivision by area label
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubRegionSplit:
    label: int  # area id within the region's map
    parts: tuple  # ((source volume id, column index array), ...)

    def column_count(self) -> int:
        return sum(len(p[1]) for p in self.parts)


def subdivide_region(
    field: ColumnField, region_volumes, ag: AreaGraph2D
) -> tuple[list[SubRegionSplit], int]:
    """Split each volume by the area label under its columns.

    Columns whose cell somehow carries no label adopt the nearest
    labeled cell (ties to the smaller label); the count of such columns
    is returned for the run report.
    """
    ox, oy = ag.offset
    labeled = np.argwhere(ag.labels >= 0)
    unlabeled = 0
    groups: dict[int, dict[int, list[int]]] = {}
    for vol in region_volumes:
        for ci in vol.column_indices:
            c = field.columns[ci]
            lx, ly = int(c["ix"]) - ox, int(c["iy"]) - oy
            label = -1
            if 0 <= lx < ag.labels.shape[0] and 0 <= ly < ag.labels.shape[1]:
                label = int(ag.labels[lx, ly])
            if label < 0:
                unlabeled += 1
                d2 = ((labeled - (lx, ly)) ** 2).sum(axis=1)
                best = d2.min()
                candidates = labeled[d2 == best]
                label = int(
                    min(int(ag.labels[cx, cy]) for cx, cy in candidates)
                )
            groups.setdefault(label, {}).setdefault(vol.id, []).append(int(ci))
    out = []
    for label in sorted(groups):
        parts = tuple(
            (vid, np.asarray(sorted(idxs), dtype=np.int64))
            for vid, idxs in sorted(groups[label].items())
        )
        out.append(SubRegionSplit(label=label, parts=parts))
    return out, unlabeled


# ---------------------------------------------------------------------------
# boundary polygons (for 2D export)
# ---------------------------------------------------------------------------

_LEFT_TURN_ORDER = {
    (1, 0): [(0, 1), (1, 0), (0, -1)],
    (0, 1): [(-1, 0), (0, 1), (1, 0)],
    (-1, 0): [(0, -1), (-1, 0), (0, 1)],
    (0, -1): [(1, 0), (0, -1), (-1, 0)],
}


def cell_boundary_loops(cells: np.ndarray) -> list[np.ndarray]:
    """Closed counterclockwise corner loops around a set of cells.

    Pinch points (cells meeting only at a corner) split into separate
    loops by always taking the sharpest left turn, which hugs the
    current blob.
    """
    cell_set = {(int(x), int(y)) for x, y in cells}
    segments: dict[tuple[int, int], dict[tuple[int, int], tuple[int, int]]] = {}

    def add(p, q):
        d = (q[0] - p[0], q[1] - p[1])
        segments.setdefault(p, {})[d] = q

    for (x, y) in sorted(cell_set):
        if (x, y - 1) not in cell_set:
            add((x, y), (x + 1, y))
        if (x + 1, y) not in cell_set:
            add((x + 1, y), (x + 1, y + 1))
        if (x, y + 1) not in cell_set:
            add((x + 1, y + 1), (x, y + 1))
        if (x - 1, y) not in cell_set:
            add((x, y + 1), (x, y))
    loops = []
    while segments:
        start = min(segments)
        d, nxt = sorted(segments[start].items())[0]
        loop = [start]
        _pop(segments, start, d)
        cur, incoming = nxt, d
        while cur != start:
            loop.append(cur)
            options = segments.get(cur, {})
            for cand in _LEFT_TURN_ORDER[incoming]:
                if cand in options:
                    nxt = options[cand]
                    _pop(segments, cur, cand)
                    incoming = cand
                    cur = nxt
                    break
            else:
                break  # open chain should not happen for cell boundaries
        loops.append(np.asarray(loop, dtype=np.int64))
    loops.sort(key=lambda l: (-_loop_area(l), tuple(l[0])))
    return loops


def _pop(segments, p, d):
    segments[p].pop(d)
    if not segments[p]:
        segments.pop(p)


def _loop_area(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * abs(
        float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
    )


def chain_segments_to_polylines(segments: np.ndarray) -> list[np.ndarray]:
    """Connect shared boundary segments into maximal polylines."""
    adj: dict[tuple[int, int], list[tuple[int, int]]] = {}
    seg_set = set()
    for (a, b) in segments:
        a, b = tuple(int(v) for v in a), tuple(int(v) for v in b)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
        seg_set.add((min(a, b), max(a, b)))
    polylines = []
    while seg_set:
        ends = sorted(p for p, ns in adj.items() if len(ns) == 1)
        start = ends[0] if ends else min(p for s in seg_set for p in s)
        line = [start]
        cur = start
        while True:
            nxt = None
            for cand in sorted(adj.get(cur, [])):
                key = (min(cur, cand), max(cur, cand))
                if key in seg_set:
                    nxt = cand
                    seg_set.discard(key)
                    break
            if nxt is None:
                break
            adj[cur].remove(nxt)
            adj[nxt].remove(cur)
            line.append(nxt)
            cur = nxt
        polylines.append(np.asarray(line, dtype=np.int64))
    return polylines

"""Hierarchical map assembly and 0D-3D serialization.

The map is a strict tree (storey -> region1 -> optional region2 ->
volume) with passage-annotated edges at the volume, region2 and region1
levels. Export dimensionality only grows annotations: 0D is the bare
graph, 1D adds a representative point per node, 2D adds footprint
polygons, passage poly-lines and label rasters, 3D adds per-volume
column payloads and passage meshes. Node and edge order is fully
deterministic, so identical inputs serialize byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .areagraph import GridMap2D, cell_boundary_loops, chain_segments_to_polylines
from .columns import COLUMN_DTYPE, ColumnField
from .errors import ConsistencyError
from .passages import Passage
from .raster import write_label_image
from .storeys import StoreySlab
from .volumes import Volume

FORMAT_VERSION = 1
DIMS = ("d0", "d1", "d2", "d3")


@dataclass
class Region1Build:
    """One region1 with its optional subdivision, in pipeline id space."""

    kind: str                       # "room" | "connection"
    volume_ids: list[int]           # final volume ids in this region
    region2_groups: list[list[int]] | None = None  # final volume ids per sub-region
    label_image: np.ndarray | None = None          # area labels of the subdivision
    map2d: GridMap2D | None = None


@dataclass
class StoreyBuild:
    index: int
    slab: StoreySlab
    field: ColumnField
    volumes: list[Volume]           # final volumes, ids = list positions
    region1: list[Region1Build]
    volume_edges: list[Passage]     # pair = final volume ids
    region1_edges: list[Passage]    # pair = region1 list indices
    region2_edges: list[Passage]    # pair = leaf indices (see leaves())
    region1_labels: np.ndarray | None = None  # per-cell region1 labels for rasters

    def leaves(self) -> list[tuple[int, int | None, list[int]]]:
        """(region1 index, sub index or None, volume ids) per region2 leaf."""
        out = []
        for ri, r1 in enumerate(self.region1):
            if r1.region2_groups is None:
                out.append((ri, None, list(r1.volume_ids)))
            else:
                for qi, group in enumerate(r1.region2_groups):
                    out.append((ri, qi, list(group)))
        return out


@dataclass(frozen=True)
class MapNode:
    id: str
    level: str              # "storey" | "region1" | "region2" | "volume"
    kind: str
    parent: str | None
    storey: int
    column_indices: np.ndarray  # indices into the storey's field


@dataclass(frozen=True)
class MapEdge:
    id: str
    level: str              # "volume" | "region2" | "region1"
    a: str
    b: str
    storey: int
    passage: Passage


@dataclass
class TopoMap:
    storeys: list[StoreyBuild]
    nodes: dict[str, MapNode] = dc_field(default_factory=dict)
    edges: list[MapEdge] = dc_field(default_factory=list)


def _columns_of_volumes(storey: StoreyBuild, volume_ids) -> np.ndarray:
    parts = [storey.volumes[v].column_indices for v in volume_ids]
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(parts))


def assemble(storeys: list[StoreyBuild]) -> TopoMap:
    """Build and validate the node/edge tables for all storeys."""
    tm = TopoMap(storeys=storeys)
    for sb in storeys:
        s_id = f"s{sb.index}"
        all_columns = np.sort(
            np.concatenate([v.column_indices for v in sb.volumes])
            if sb.volumes
            else np.zeros(0, dtype=np.int64)
        )
        if len(all_columns) != len(sb.field) or (
            len(all_columns) and not np.array_equal(all_columns, np.arange(len(sb.field)))
        ):
            raise ConsistencyError(f"storey {sb.index}: volumes do not partition the columns")
        tm.nodes[s_id] = MapNode(
            id=s_id, level="storey", kind="storey", parent=None,
            storey=sb.index, column_indices=all_columns,
        )
        volume_parent: dict[int, str] = {}
        for ri, r1 in enumerate(sb.region1):
            r_id = f"{s_id}.r{ri}"
            r_cols = _columns_of_volumes(sb, r1.volume_ids)
            tm.nodes[r_id] = MapNode(
                id=r_id, level="region1", kind=r1.kind, parent=s_id,
                storey=sb.index, column_indices=r_cols,
            )
            if r1.region2_groups is None:
                for v in r1.volume_ids:
                    volume_parent[v] = r_id
            else:
                claimed = []
                for qi, group in enumerate(r1.region2_groups):
                    q_id = f"{r_id}.q{qi}"
                    q_cols = _columns_of_volumes(sb, group)
                    claimed.append(q_cols)
                    tm.nodes[q_id] = MapNode(
                        id=q_id, level="region2", kind="room", parent=r_id,
                        storey=sb.index, column_indices=q_cols,
                    )
                    for v in group:
                        volume_parent[v] = q_id
                joined = np.sort(np.concatenate(claimed)) if claimed else np.zeros(0, int)
                if not np.array_equal(joined, r_cols):
                    raise ConsistencyError(
                        f"{r_id}: sub-regions do not partition the region columns"
                    )
        for v in sb.volumes:
            if v.id not in volume_parent:
                raise ConsistencyError(
                    f"storey {sb.index}: volume {v.id} belongs to no region"
                )
            v_id = f"{s_id}.v{v.id}"
            tm.nodes[v_id] = MapNode(
                id=v_id, level="volume", kind="volume", parent=volume_parent[v.id],
                storey=sb.index, column_indices=np.sort(v.column_indices),
            )

        leaves = sb.leaves()
        for e in sb.volume_edges:
            a, b = f"{s_id}.v{e.pair[0]}", f"{s_id}.v{e.pair[1]}"
            _add_edge(tm, "volume", a, b, sb.index, e)
        for e in sb.region2_edges:
            la, lb = leaves[e.pair[0]], leaves[e.pair[1]]
            a = _leaf_node_id(s_id, la)
            b = _leaf_node_id(s_id, lb)
            if la[1] is None and lb[1] is None:
                continue  # both plain region1 nodes: covered by the region1 edge
            _add_edge(tm, "region2", a, b, sb.index, e)
        for e in sb.region1_edges:
            a, b = f"{s_id}.r{e.pair[0]}", f"{s_id}.r{e.pair[1]}"
            _add_edge(tm, "region1", a, b, sb.index, e)
    return tm


def _leaf_node_id(s_id: str, leaf) -> str:
    ri, qi, _ = leaf
    return f"{s_id}.r{ri}" if qi is None else f"{s_id}.r{ri}.q{qi}"


def _add_edge(tm: TopoMap, level: str, a: str, b: str, storey: int, passage: Passage):
    for end in (a, b):
        if end not in tm.nodes:
            raise ConsistencyError(f"edge endpoint {end} does not exist")
    if tm.nodes[a].storey != tm.nodes[b].storey:
        raise ConsistencyError(f"edge {a} -- {b} crosses storeys")
    e_id = f"e{len(tm.edges)}"
    tm.edges.append(MapEdge(id=e_id, level=level, a=a, b=b, storey=storey, passage=passage))


# ---------------------------------------------------------------------------
# annotations
# ---------------------------------------------------------------------------

def node_centroid(tm: TopoMap, node: MapNode) -> np.ndarray:
    """Voxel-weighted centroid snapped to the nearest owned voxel center.

    Snapping guarantees the point lies inside the node's own free space
    even for L-shaped or ring-shaped regions.
    """
    sb = tm.storeys[_storey_index(tm, node.storey)]
    cols = sb.field.columns[node.column_indices]
    if len(cols) == 0:
        raise ConsistencyError(f"node {node.id} owns no columns")
    lengths = (cols["z2"] - cols["z1"] + 1).astype(float)
    total = lengths.sum()
    cx = float(((cols["ix"] + 0.5) * lengths).sum() / total)
    cy = float(((cols["iy"] + 0.5) * lengths).sum() / total)
    cz = float((((cols["z1"] + cols["z2"] + 1) / 2.0) * lengths).sum() / total)
    # snap to the nearest owned voxel center (per column: clamp z to its span)
    zc = np.clip(np.floor(cz) + 0.5, cols["z1"] + 0.5, cols["z2"] + 0.5)
    d2 = (cols["ix"] + 0.5 - cx) ** 2 + (cols["iy"] + 0.5 - cy) ** 2 + (zc - cz) ** 2
    order = np.lexsort((cols["z1"], cols["iy"], cols["ix"]))
    ranked = order[np.argsort(d2[order], kind="stable")]
    best = int(ranked[0])
    cell = np.array([cols[best]["ix"] + 0.5, cols[best]["iy"] + 0.5, zc[best]])
    return sb.field.origin + cell * sb.field.voxel


def _storey_index(tm: TopoMap, storey: int) -> int:
    for i, sb in enumerate(tm.storeys):
        if sb.index == storey:
            return i
    raise ConsistencyError(f"unknown storey {storey}")


def node_polygon(tm: TopoMap, node: MapNode) -> list[np.ndarray]:
    """Footprint boundary loops of a node's columns, in meters."""
    sb = tm.storeys[_storey_index(tm, node.storey)]
    cols = sb.field.columns[node.column_indices]
    cells = np.unique(np.stack([cols["ix"], cols["iy"]], axis=1), axis=0)
    loops = cell_boundary_loops(cells)
    return [
        sb.field.origin[:2] + loop.astype(float) * sb.field.voxel for loop in loops
    ]


def edge_polylines(tm: TopoMap, edge: MapEdge) -> list[np.ndarray]:
    """Plan-view poly-lines of a passage (projected quad segments), meters."""
    sb = tm.storeys[_storey_index(tm, edge.storey)]
    p = edge.passage
    seen = set()
    segments = []
    for quad in p.quads:
        pts = p.points[quad]
        seg = tuple(sorted({(int(x), int(y)) for x, y, _ in pts}))
        if len(seg) == 2 and seg not in seen:
            seen.add(seg)
            segments.append(seg)
    lines = chain_segments_to_polylines(np.asarray(sorted(segments), dtype=np.int64))
    return [sb.field.origin[:2] + line.astype(float) * sb.field.voxel for line in lines]


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def _round3(values) -> list:
    return [round(float(v), 9) for v in values]


def export(tm: TopoMap, dim: str, out_dir) -> list[Path]:
    """Write the map at the requested dimensionality; returns created files."""
    if dim not in DIMS:
        raise ValueError(f"dim must be one of {DIMS}, got {dim!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    doc = {
        "format_version": FORMAT_VERSION,
        "dim": dim,
        "storeys": [
            {
                "index": sb.index,
                "floor_height": round(sb.slab.floor_height, 9),
                "ceiling_height": round(sb.slab.ceiling_height, 9),
                "grid": {
                    "origin": _round3(sb.field.origin),
                    "voxel": sb.field.voxel,
                    "dims": list(sb.field.dims),
                    "floor_z_index": sb.field.floor_z_index,
                },
            }
            for sb in tm.storeys
        ],
        "nodes": [],
        "edges": [],
    }
    for node in tm.nodes.values():
        item = {
            "id": node.id,
            "level": node.level,
            "kind": node.kind,
            "parent": node.parent,
            "storey": node.storey,
        }
        if dim >= "d1":
            item["point"] = _round3(node_centroid(tm, node))
        if dim >= "d2" and node.level in ("region1", "region2"):
            item["polygon"] = [
                [_round3(pt) for pt in loop] for loop in node_polygon(tm, node)
            ]
        if dim == "d3" and node.level == "volume":
            sb = tm.storeys[_storey_index(tm, node.storey)]
            cols = sb.field.columns[node.column_indices]
            item["columns"] = [
                [int(c["ix"]), int(c["iy"]), int(c["z1"]), int(c["z2"])] for c in cols
            ]
        doc["nodes"].append(item)
    for edge in tm.edges:
        item = {
            "id": edge.id,
            "level": edge.level,
            "a": edge.a,
            "b": edge.b,
            "storey": edge.storey,
        }
        if dim >= "d2":
            item["polyline"] = [
                [_round3(pt) for pt in line] for line in edge_polylines(tm, edge)
            ]
        if dim == "d3":
            item["passage"] = {
                "points": edge.passage.points.tolist(),
                "quads": edge.passage.quads.tolist(),
            }
        doc["edges"].append(item)

    main = out_dir / "topomap.json"
    main.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    created.append(main)

    if dim >= "d2":
        created.extend(_export_rasters(tm, out_dir))
    if dim == "d3":
        created.extend(_export_meshes(tm, out_dir))
    return created


def _export_rasters(tm: TopoMap, out_dir: Path) -> list[Path]:
    created = []
    for sb in tm.storeys:
        if sb.region1_labels is not None:
            p = out_dir / f"s{sb.index}_regions.png"
            write_label_image(sb.region1_labels, p)
            created.append(p)
        for ri, r1 in enumerate(sb.region1):
            if r1.label_image is not None:
                p = out_dir / f"s{sb.index}_r{ri}_areas.png"
                write_label_image(r1.label_image, p)
                created.append(p)
    return created


def _export_meshes(tm: TopoMap, out_dir: Path) -> list[Path]:
    mesh_dir = out_dir / "passages"
    mesh_dir.mkdir(exist_ok=True)
    created = []
    for edge in tm.edges:
        sb = tm.storeys[_storey_index(tm, edge.storey)]
        p = mesh_dir / f"{edge.id}.ply"
        _write_quad_mesh(
            p,
            sb.field.origin + edge.passage.points * sb.field.voxel,
            edge.passage.quads,
        )
        created.append(p)
    return created


def _write_quad_mesh(path: Path, vertices: np.ndarray, quads: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {len(vertices)}\n")
        f.write("property double x\nproperty double y\nproperty double z\n")
        f.write(f"element face {len(quads)}\n")
        f.write("property list uchar int vertex_indices\nend_header\n")
        for v in vertices:
            f.write(f"{v[0]:.6f} {v[1]:.6f} {v[2]:.6f}\n")
        for q in quads:
            # quad corners arrive as (a, b, a+z, b+z); reorder to a ring
            f.write(f"4 {q[0]} {q[1]} {q[3]} {q[2]}\n")


# ---------------------------------------------------------------------------
# import / round trip
# ---------------------------------------------------------------------------

@dataclass
class LoadedMap:
    """Deserialized d3 map: enough to rebuild every node's geometry."""

    doc: dict
    nodes: dict[str, dict]
    edges: list[dict]

    def volume_columns(self, node_id: str) -> np.ndarray:
        cols = np.array(
            [tuple(c) for c in self.nodes[node_id]["columns"]], dtype=COLUMN_DTYPE
        )
        return cols


def import_topomap(path) -> LoadedMap:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    nodes = {n["id"]: n for n in doc["nodes"]}
    return LoadedMap(doc=doc, nodes=nodes, edges=doc["edges"])


def roundtrip_equal(tm: TopoMap, loaded: LoadedMap) -> bool:
    """id-for-id, column-for-column equality of a map and a d3 import."""
    if set(tm.nodes) != set(loaded.nodes):
        return False
    for node_id, node in tm.nodes.items():
        got = loaded.nodes[node_id]
        if (got["level"], got["kind"], got["parent"]) != (node.level, node.kind, node.parent):
            return False
        if node.level == "volume":
            sb = tm.storeys[_storey_index(tm, node.storey)]
            want = sb.field.columns[node.column_indices]
            have = loaded.volume_columns(node_id)
            if len(want) != len(have) or not all(
                tuple(a) == tuple(b) for a, b in zip(want, have)
            ):
                return False
    if len(tm.edges) != len(loaded.edges):
        return False
    for edge, got in zip(tm.edges, loaded.edges):
        if (got["id"], got["level"], got["a"], got["b"]) != (
            edge.id, edge.level, edge.a, edge.b,
        ):
            return False
        if got["passage"]["points"] != edge.passage.points.tolist():
            return False
        if got["passage"]["quads"] != edge.passage.quads.tolist():
            return False
    return True


def summarize(loaded: LoadedMap) -> str:
    """Human-readable inventory of a serialized map."""
    by_level: dict[str, int] = {}
    for n in loaded.nodes.values():
        by_level[n["level"]] = by_level.get(n["level"], 0) + 1
    edge_levels: dict[str, int] = {}
    for e in loaded.edges:
        edge_levels[e["level"]] = edge_levels.get(e["level"], 0) + 1
    lines = [f"format_version: {loaded.doc['format_version']}", f"dim: {loaded.doc['dim']}"]
    lines.append(f"storeys: {len(loaded.doc['storeys'])}")
    for level in ("storey", "region1", "region2", "volume"):
        lines.append(f"nodes[{level}]: {by_level.get(level, 0)}")
    for level in ("volume", "region2", "region1"):
        lines.append(f"edges[{level}]: {edge_levels.get(level, 0)}")
    return "\n".join(lines)

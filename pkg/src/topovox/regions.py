"""Group volumes into regions: rooms, corridors and door connections.

Rooms are much bigger than doors, so any volume above the size
threshold a_th seeds a room. Seeds joined by an edge merge into one
seed cluster (several large volumes in one room must not split it),
then each cluster grows breadth-first over non-seed volumes, stopping
at other seeds. A volume reached by more than one cluster is exactly
the free space shared between two rooms, i.e. a doorway: it is pulled
out of every room and becomes its own "connection" region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoSeedError
from .passages import Passage, VolumeGraph, _passages_from_corner_sets
from .volumes import Volume

DEFAULT_A_TH = 20.0  # cubic meters

ROOM = "room"
CONNECTION = "connection"


@dataclass(frozen=True)
class Region:
    id: int
    kind: str  # ROOM or CONNECTION
    volume_ids: tuple[int, ...]  # sorted
    parent_storey: int


@dataclass
class RegionGraph:
    regions: list[Region]
    edges: list[Passage]  # pair fields hold region ids

    def region_of_volume(self) -> dict[int, int]:
        out = {}
        for r in self.regions:
            for v in r.volume_ids:
                out[v] = r.id
        return out


def select_seeds(volumes: list[Volume], a_th: float = DEFAULT_A_TH) -> list[int]:
    """Volume ids whose free space exceeds a_th cubic meters."""
    if a_th <= 0:
        raise ValueError("a_th must be positive")
    seeds = [v.id for v in volumes if v.size_m3 > a_th]
    if not seeds:
        largest = max((v.size_m3 for v in volumes), default=0.0)
        raise NoSeedError(a_th=a_th, largest=largest)
    return sorted(seeds)


def filter_seeds(seeds, graph: VolumeGraph) -> list[tuple[int, ...]]:
    """Merge seeds connected by an edge into seed clusters.

    Returns connected components of the seed-induced subgraph, each as
    a sorted tuple, ordered by smallest member.
    """
    seed_set = set(seeds)
    adjacency: dict[int, set[int]] = {s: set() for s in seed_set}
    for e in graph.edges:
        a, b = e.pair
        if a in seed_set and b in seed_set:
            adjacency[a].add(b)
            adjacency[b].add(a)
    clusters = []
    unseen = set(seed_set)
    for s in sorted(seed_set):
        if s not in unseen:
            continue
        comp = {s}
        stack = [s]
        unseen.discard(s)
        while stack:
            u = stack.pop()
            for w in adjacency[u]:
                if w in unseen:
                    unseen.discard(w)
                    comp.add(w)
                    stack.append(w)
        clusters.append(tuple(sorted(comp)))
    return clusters


def grow_regions(
    graph: VolumeGraph, seed_clusters: list[tuple[int, ...]], parent_storey: int = 0
) -> list[Region]:
    """Alg-style breadth-first region growth with doorway extraction.

    Every cluster grows independently over non-seed volumes (growth
    never enters another cluster's seeds); a volume collected by two or
    more grown regions is removed from all of them and re-emitted as a
    singleton connection region. Volumes no cluster reaches become
    singleton rooms so that regions always partition the volume set.
    """
    adjacency: dict[int, set[int]] = {v.id: set() for v in graph.volumes}
    for e in graph.edges:
        a, b = e.pair
        adjacency[a].add(b)
        adjacency[b].add(a)
    all_seeds = {s for cluster in seed_clusters for s in cluster}

    grown: list[set[int]] = []
    count: dict[int, int] = {v.id: 0 for v in graph.volumes}
    for cluster in seed_clusters:
        r = set(cluster)
        frontier = sorted(cluster)
        while frontier:
            nxt = set()
            for v1 in frontier:
                for v in sorted(adjacency[v1]):
                    if v in all_seeds or v in r:
                        continue
                    nxt.add(v)
            r |= nxt
            frontier = sorted(nxt)
        for v in r:
            count[v] += 1
        grown.append(r)

    connections = sorted(v for v, c in count.items() if c > 1)
    regions = []
    for r in grown:
        members = tuple(sorted(r - set(connections)))
        regions.append(
            Region(id=len(regions), kind=ROOM, volume_ids=members, parent_storey=parent_storey)
        )
    for v in connections:
        regions.append(
            Region(id=len(regions), kind=CONNECTION, volume_ids=(v,), parent_storey=parent_storey)
        )
    unreached = sorted(v.id for v in graph.volumes if count[v.id] == 0)
    for v in unreached:
        regions.append(
            Region(id=len(regions), kind=ROOM, volume_ids=(v,), parent_storey=parent_storey)
        )
    return regions


def lift_passages(
    graph: VolumeGraph, regions: list[Region], voxel: float, d_th: float
) -> RegionGraph:
    """Re-cluster volume-level contact points crossing region boundaries.

    For each region pair all crossing passage quads pool together and
    are re-clustered with the same distance threshold, one region edge
    per resulting cluster.
    """
    region_of = {}
    for r in regions:
        for v in r.volume_ids:
            region_of[v] = r.id
    buckets: dict[tuple[int, int], list[np.ndarray]] = {}
    for e in graph.edges:
        ra, rb = region_of[e.pair[0]], region_of[e.pair[1]]
        if ra == rb:
            continue
        pair = (min(ra, rb), max(ra, rb))
        bucket = buckets.setdefault(pair, [])
        bucket.extend(e.points[quad] for quad in e.quads)
    edges = []
    for pair in sorted(buckets):
        edges.extend(_passages_from_corner_sets(buckets[pair], pair, voxel, d_th))
    return RegionGraph(regions=regions, edges=edges)

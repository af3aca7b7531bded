"""Full pipeline orchestration: cloud file in, topometric map out.

Stage order: load, preprocess (downsample and denoise), storey
detection on the raw cloud, then per storey rasterize, extract columns,
grow volumes, generate passages, grow regions, subdivide large regions
through the 2D area graph, and finally assemble and export the
hierarchical map. The run report collects entity counts, warnings and
wall times per stage; everything except the timings is deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import areagraph as ag
from . import cloud as tc
from . import columns as tcol
from . import passages as tp
from . import regions as tr
from . import storeys as ts
from . import topomap as tmap
from . import volumes as tvol
from . import voxelgrid as tv
from .config import PipelineConfig
from .errors import PipelineError
from .volumes import Volume


@dataclass
class RunResult:
    report: dict
    topomap: tmap.TopoMap
    files: list[Path]


class _Timer:
    def __init__(self, report):
        self.report = report

    def stage(self, name):
        return _StageTimer(self.report, name)


class _StageTimer:
    def __init__(self, report, name):
        self.report = report
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.report["timings"][self.name] = round(time.perf_counter() - self.t0, 6)
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def run(config: PipelineConfig) -> RunResult:
    config.validate()
    report: dict = {"config": config.to_dict(), "timings": {}, "warnings": [], "counts": {}}
    timer = _Timer(report)
    created: list[Path] = []
    try:
        with timer.stage("load"):
            loaded = tc.load_cloud(config.input, config.format)
            raw = loaded.cloud
            if loaded.rejected:
                report["warnings"].append(
                    f"load: rejected {loaded.rejected} points with non-finite coordinates"
                )
            report["counts"]["points_loaded"] = len(raw)

        with timer.stage("preprocess"):
            if config.denoise_first:
                cloud = tc.denoise_clusters(raw, config.link_dist, config.min_points)
                dropped_noise = len(raw) - len(cloud)
                cloud = tc.voxel_downsample(cloud, config.downsample_cell)
            else:
                cloud = tc.voxel_downsample(raw, config.downsample_cell)
                n0 = len(cloud)
                cloud = tc.denoise_clusters(cloud, config.link_dist, config.min_points)
                dropped_noise = n0 - len(cloud)
            if dropped_noise:
                report["warnings"].append(
                    f"preprocess: removed {dropped_noise} points in small clusters"
                )
            report["counts"]["points_preprocessed"] = len(cloud)

        with timer.stage("storeys"):
            if config.debug:
                hist = ts.build_z_histogram(raw, config.bin_size)
                created.extend(
                    ts.write_debug_outputs(
                        hist, config.window_sizes, Path(config.out_dir) / "debug"
                    )
                )
            if config.peaks is not None:
                peaks = sorted(config.peaks)
                report["counts"]["peaks_overridden"] = len(peaks)
            else:
                hist = ts.build_z_histogram(raw, config.bin_size)
                peaks = ts.select_peaks(ts.detect_peaks(hist, config.window_sizes))
            report["counts"]["peaks"] = len(peaks)
            report["peak_heights"] = [round(float(p), 6) for p in peaks]
            split = ts.label_and_split(cloud, peaks, config.bin_size, config.slab_margin)
            report["counts"]["storeys"] = len(split)

        storeys = []
        for slab, storey_cloud in split:
            storeys.append(_build_storey(slab, storey_cloud, config, report))

        with timer.stage("assemble"):
            tm = tmap.assemble(storeys)

        with timer.stage("export"):
            out_dir = Path(config.out_dir)
            for dim in config.dims:
                created.extend(tmap.export(tm, dim, out_dir / dim))
        report["counts"]["files_written"] = len(created)
        return RunResult(report=report, topomap=tm, files=created)
    except Exception:
        for path in created:
            try:
                path.unlink()
            except OSError:
                pass
        raise


def _build_storey(slab, storey_cloud, config: PipelineConfig, report) -> tmap.StoreyBuild:
    """All per-storey stages, from rasterization to region subdivision."""
    k = slab.index
    timings = report["timings"]
    counts = report["counts"]
    t0 = time.perf_counter()
    try:
        grid = tv.rasterize(storey_cloud, slab, config.voxel, config.memory_cap)
        if config.debug:
            debug_dir = Path(config.out_dir) / "debug"
            debug_dir.mkdir(parents=True, exist_ok=True)
            tv.dump_occupancy(grid, debug_dir / f"s{k}_occupancy.bin")
        field = tcol.extract_columns(grid)
        for key, value in field.stats.items():
            counts[f"s{k}_{key}"] = value
        if field.stats.get("unbounded_columns_deleted"):
            report["warnings"].append(
                f"storey {k}: removed {field.stats['unbounded_columns_deleted']} "
                "columns with no ceiling above (outside or unscanned roof)"
            )
        counts[f"s{k}_columns"] = len(field)

        volumes = tvol.grow_volumes(field, config.rel_tol)
        counts[f"s{k}_volumes_initial"] = len(volumes)
        ids = tvol.column_volume_ids(field, volumes)
        d_th = config.passage_distance()
        graph = tp.build_volume_graph(field, volumes, ids, d_th)
        counts[f"s{k}_volume_edges_initial"] = len(graph.edges)

        seeds = tr.select_seeds(volumes, config.a_th)
        clusters = tr.filter_seeds(seeds, graph)
        counts[f"s{k}_seed_clusters"] = len(clusters)
        regions = tr.grow_regions(graph, clusters, parent_storey=k)
        counts[f"s{k}_regions"] = len(regions)
        counts[f"s{k}_connections"] = sum(1 for r in regions if r.kind == tr.CONNECTION)

        storey = _subdivide_and_renumber(
            slab, field, volumes, regions, config, report
        )
        counts[f"s{k}_volumes"] = len(storey.volumes)
        counts[f"s{k}_region2"] = sum(
            len(r1.region2_groups) for r1 in storey.region1 if r1.region2_groups
        )
        counts[f"s{k}_volume_edges"] = len(storey.volume_edges)
        counts[f"s{k}_region1_edges"] = len(storey.region1_edges)
        return storey
    except Exception as exc:
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(f"storey_{k}", exc) from exc
    finally:
        timings[f"storey_{k}"] = round(time.perf_counter() - t0, 6)


def _subdivide_and_renumber(
    slab, field, volumes, regions, config: PipelineConfig, report
) -> tmap.StoreyBuild:
    """Split large regions via the area graph and renumber volumes."""
    d_th = config.passage_distance()
    final_volumes: list[Volume] = []
    region1_builds: list[tmap.Region1Build] = []

    def new_volume(column_indices) -> int:
        vid = len(final_volumes)
        idx = np.sort(np.asarray(column_indices))
        cols = field.columns[idx]
        z_bot = field.origin[2] + int(cols["z1"].min()) * field.voxel
        z_top = field.origin[2] + (int(cols["z2"].max()) + 1) * field.voxel
        final_volumes.append(
            Volume(
                id=vid,
                column_indices=idx,
                size_m3=tvol.volume_size(field, idx),
                z_bottom=float(z_bot),
                z_top=float(z_top),
            )
        )
        return vid

    for region in regions:
        member_volumes = [volumes[v] for v in region.volume_ids]
        total = sum(v.size_m3 for v in member_volumes)
        subdivide = region.kind == tr.ROOM and total > config.subdivide_gate
        if not subdivide:
            ids = [new_volume(v.column_indices) for v in member_volumes]
            region1_builds.append(
                tmap.Region1Build(kind=region.kind, volume_ids=ids)
            )
            continue
        all_columns = np.concatenate([v.column_indices for v in member_volumes])
        gmap = ag.project_region(field, all_columns)
        vd = ag.voronoi(gmap)
        tg = ag.topology_graph(vd, config.prune_len)
        graph2d = ag.area_graph(tg, gmap, config.min_passage_segments)
        merged = ag.alpha_shape_merge(
            graph2d, gmap, config.alpha, config.min_passage_segments,
            warnings=report["warnings"],
        )
        splits, unlabeled = ag.subdivide_region(field, member_volumes, merged)
        if unlabeled:
            report["warnings"].append(
                f"storey {slab.index}: {unlabeled} columns had no area label "
                "and were assigned to the nearest labeled cell"
            )
            report["counts"]["unlabeled_columns"] = (
                report["counts"].get("unlabeled_columns", 0) + unlabeled
            )
        groups = []
        for split in splits:
            groups.append([new_volume(part_cols) for _, part_cols in split.parts])
        region1_builds.append(
            tmap.Region1Build(
                kind=region.kind,
                volume_ids=[v for g in groups for v in g],
                region2_groups=groups,
                label_image=np.where(merged.labels >= 0, merged.labels + 1, 0),
                map2d=gmap,
            )
        )

    final_ids = tvol.column_volume_ids(field, final_volumes)
    volume_edges = tp.generate_passages(field, final_ids, d_th)
    final_graph = tp.VolumeGraph(volumes=final_volumes, edges=volume_edges)

    leaf_regions = []
    leaf_index = 0
    for ri, r1 in enumerate(region1_builds):
        if r1.region2_groups is None:
            leaf_regions.append(
                tr.Region(id=leaf_index, kind=r1.kind, volume_ids=tuple(r1.volume_ids),
                          parent_storey=slab.index)
            )
            leaf_index += 1
        else:
            for group in r1.region2_groups:
                leaf_regions.append(
                    tr.Region(id=leaf_index, kind=r1.kind, volume_ids=tuple(group),
                              parent_storey=slab.index)
                )
                leaf_index += 1
    region2_edges = tr.lift_passages(final_graph, leaf_regions, field.voxel, d_th).edges

    r1_regions = [
        tr.Region(id=ri, kind=r1.kind, volume_ids=tuple(r1.volume_ids),
                  parent_storey=slab.index)
        for ri, r1 in enumerate(region1_builds)
    ]
    region1_edges = tr.lift_passages(final_graph, r1_regions, field.voxel, d_th).edges

    region1_labels = _region1_label_raster(field, final_volumes, region1_builds)
    return tmap.StoreyBuild(
        index=slab.index,
        slab=slab,
        field=field,
        volumes=final_volumes,
        region1=region1_builds,
        volume_edges=volume_edges,
        region1_edges=region1_edges,
        region2_edges=region2_edges,
        region1_labels=region1_labels,
    )


def _region1_label_raster(field, final_volumes, region1_builds) -> np.ndarray:
    """Plan-view region1 labels: cell -> region owning most voxels there."""
    region_of_volume = {}
    for ri, r1 in enumerate(region1_builds):
        for v in r1.volume_ids:
            region_of_volume[v] = ri
    nx, ny = field.dims[0], field.dims[1]
    votes: dict[tuple[int, int], dict[int, int]] = {}
    for v in final_volumes:
        ri = region_of_volume[v.id]
        cols = field.columns[v.column_indices]
        for c in cols:
            key = (int(c["ix"]), int(c["iy"]))
            votes.setdefault(key, {})[ri] = votes.get(key, {}).get(ri, 0) + int(
                c["z2"] - c["z1"] + 1
            )
        # labels are region index + 1; 0 stays background
    labels = np.zeros((nx, ny), dtype=np.int64)
    for (ix, iy), per_region in votes.items():
        best = min(sorted(per_region.items()), key=lambda kv: (-kv[1], kv[0]))
        labels[ix, iy] = best[0] + 1
    return labels

"""Command line interface: build, eval, fixture, inspect.

Exit codes: 0 success, 1 usage error, 2 input error (missing or
malformed files), 3 pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluation as ev
from . import fixtures as fx
from . import raster
from . import topomap as tmap
from .config import PipelineConfig
from .errors import CloudParseError, EmptyCloudError, PipelineError, TopovoxError
from .pipeline import run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_PIPELINE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    p = _Parser(prog="topovox", description="Hierarchical topometric maps from 3D point clouds")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="run the full pipeline on a point cloud")
    b.add_argument("--input", required=True)
    b.add_argument("--format", choices=["ply_ascii", "ply_binary_le", "pcd_ascii", "xyz_text"])
    b.add_argument("--out", dest="out_dir", default="out")
    b.add_argument("--dims", default=None, help="comma list of d0,d1,d2,d3")
    b.add_argument("--config", help="JSON config file; flags override its keys")
    b.add_argument("--voxel", type=float)
    b.add_argument("--downsample-cell", type=float, dest="downsample_cell")
    b.add_argument("--link-dist", type=float, dest="link_dist")
    b.add_argument("--min-points", type=int, dest="min_points")
    b.add_argument("--denoise-first", action="store_true", default=None, dest="denoise_first")
    b.add_argument("--bin-size", type=float, dest="bin_size")
    b.add_argument("--window-sizes", dest="window_sizes", help="comma list of meters")
    b.add_argument("--slab-margin", type=float, dest="slab_margin")
    b.add_argument("--peaks", help="comma list of explicit peak heights (meters)")
    b.add_argument("--rel-tol", type=float, dest="rel_tol")
    b.add_argument("--d-th", type=float, dest="d_th")
    b.add_argument("--a-th", type=float, dest="a_th")
    b.add_argument("--subdivide-gate", type=float, dest="subdivide_gate")
    b.add_argument("--alpha", type=float)
    b.add_argument("--prune-len", type=int, dest="prune_len")
    b.add_argument("--memory-cap", type=int, dest="memory_cap")
    b.add_argument("--threads", type=int)
    b.add_argument("--debug", action="store_true", default=None,
                   help="dump histogram CSVs, peak JSON and occupancy grids")

    e = sub.add_parser("eval", help="score a segmentation raster against ground truth")
    e.add_argument("--seg", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--out", help="write the MCC report JSON here")
    e.add_argument("--aggregation", choices=["pixel_weighted", "mean"], default="pixel_weighted")

    f = sub.add_parser("fixture", help="generate a synthetic scene with ground truth")
    f.add_argument("--kind", required=True, choices=sorted(fx.KINDS))
    f.add_argument("--out", dest="out_dir", default="fixtures")
    f.add_argument(
        "--param", action="append", default=[],
        help="fixture parameter as name=value, repeatable",
    )

    i = sub.add_parser("inspect", help="summarize a serialized map")
    i.add_argument("--map", required=True, dest="map_path")
    return p


def _parse_params(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise _UsageError(f"--param expects name=value, got {item!r}")
        name, value = item.split("=", 1)
        try:
            out[name] = int(value)
        except ValueError:
            try:
                out[name] = float(value)
            except ValueError:
                raise _UsageError(f"--param {name} needs a numeric value") from None
    return out


def _cmd_build(args) -> int:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    for key in (
        "input", "format", "out_dir", "voxel", "downsample_cell", "link_dist",
        "min_points", "denoise_first", "bin_size", "slab_margin", "rel_tol",
        "d_th", "a_th", "subdivide_gate", "alpha", "prune_len", "memory_cap",
        "threads", "debug",
    ):
        overrides[key] = getattr(args, key, None)
    if args.dims:
        overrides["dims"] = tuple(args.dims.split(","))
    if args.window_sizes:
        overrides["window_sizes"] = tuple(float(v) for v in args.window_sizes.split(","))
    if args.peaks:
        overrides["peaks"] = tuple(float(v) for v in args.peaks.split(","))
    try:
        config = config.updated(**overrides)
        config.validate()
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run(config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (FileNotFoundError, CloudParseError, EmptyCloudError)):
            return EXIT_INPUT
        return EXIT_PIPELINE
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "run_report.json"
    report_path.write_text(json.dumps(result.report, indent=1, sort_keys=True) + "\n")
    counts = result.report["counts"]
    print(f"storeys: {counts.get('storeys')}")
    for key in sorted(counts):
        if key.endswith(("_columns", "_volumes", "_regions", "_region1_edges")):
            print(f"{key}: {counts[key]}")
    print(f"report: {report_path}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    try:
        seg = raster.read_label_image(args.seg)
        gt = raster.read_label_image(args.gt)
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = ev.evaluate(seg, gt, aggregation=args.aggregation)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(report.table())
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_fixture(args) -> int:
    params = _parse_params(args.param)
    try:
        fixture = fx.make_fixture(args.kind, **params)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    files = fixture.write(args.out_dir)
    for path in files:
        print(path)
    return EXIT_OK


def _cmd_inspect(args) -> int:
    try:
        loaded = tmap.import_topomap(args.map_path)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: malformed map file: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(tmap.summarize(loaded))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "fixture":
            return _cmd_fixture(args)
        if args.command == "inspect":
            return _cmd_inspect(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TopovoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

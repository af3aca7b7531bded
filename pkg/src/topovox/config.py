"""Pipeline configuration: one flat key set, file plus CLI overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path


@dataclass
class PipelineConfig:
    input: str = ""
    format: str | None = None          # None: infer from extension
    out_dir: str = "out"
    dims: tuple[str, ...] = ("d0", "d1", "d2", "d3")

    voxel: float = 0.15                # occupancy grid edge, meters
    downsample_cell: float = 0.05
    link_dist: float = 0.20            # denoise cluster linkage
    min_points: int = 100              # denoise cluster survival size
    denoise_first: bool = False        # default order: downsample then denoise

    bin_size: float = 0.01             # z histogram bin
    window_sizes: tuple[float, ...] = (0.02, 0.04, 0.06, 0.08, 0.10)
    slab_margin: float = 0.30
    peaks: tuple[float, ...] | None = None  # explicit floor/ceiling override

    rel_tol: float = 0.10              # column top-height tolerance fraction
    d_th: float | None = None          # passage cluster distance; None: 1.5 * voxel
    a_th: float = 20.0                 # region seed threshold, cubic meters
    subdivide_gate: float = 20.0       # region volume above which the 2D stage runs
    alpha: float = 1.2                 # alpha-shape circle diameter, meters
    prune_len: int = 4                 # skeleton spur pruning, cells
    min_passage_segments: int = 2

    memory_cap: int = 2 * 1024 ** 3
    threads: int = 1
    debug: bool = False                # dump histogram CSVs and occupancy grids

    def passage_distance(self) -> float:
        return 1.5 * self.voxel if self.d_th is None else self.d_th

    def validate(self) -> None:
        for name in ("voxel", "downsample_cell", "link_dist", "bin_size",
                     "slab_margin", "alpha"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must be in (0, 1)")
        if self.min_points < 1:
            raise ValueError("min_points must be >= 1")
        if any(w < self.bin_size for w in self.window_sizes):
            raise ValueError("window sizes must be at least one histogram bin")
        bad = [d for d in self.dims if d not in ("d0", "d1", "d2", "d3")]
        if bad:
            raise ValueError(f"unknown export dims: {bad}")

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        data = json.loads(Path(path).read_text())
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in dc_fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("dims", "window_sizes", "peaks"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def updated(self, **overrides) -> "PipelineConfig":
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return self.from_dict(data)

    def to_dict(self) -> dict:
        out = {}
        for f in dc_fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

"""topovox: hierarchical topometric maps from indoor 3D point clouds.

The pipeline turns a gravity-aligned building scan into a
storey / region / sub-region / volume graph whose edges carry
passage contact surfaces, exportable at 0D-3D annotation levels,
plus an MCC evaluator for scoring 2D projections of the result.
"""

from .areagraph import (
    AreaGraph2D,
    GridMap2D,
    TopologyGraph2D,
    VoronoiDiagram2D,
    alpha_shape_edges,
    alpha_shape_merge,
    area_graph,
    project_region,
    subdivide_region,
    topology_graph,
    voronoi,
)
from .cloud import PointCloud, denoise_clusters, load_cloud, voxel_downsample, write_cloud
from .columns import Column, ColumnField, clamp_to_floor, extract_columns, prune_unbounded
from .config import PipelineConfig
from .errors import (
    CapacityError,
    CloudParseError,
    ConsistencyError,
    DegenerateSignalError,
    EmptyCloudError,
    NoSeedError,
    PeakAlternationError,
    PipelineError,
    TopovoxError,
)
from .evaluation import MccReport, evaluate, match_regions, mcc
from .fixtures import Fixture, make_fixture
from .passages import Passage, VolumeGraph, cluster_contact_points, generate_passages
from .pipeline import RunResult, run
from .regions import Region, RegionGraph, filter_seeds, grow_regions, lift_passages, select_seeds
from .storeys import (
    HeightHistogram,
    StoreySlab,
    build_z_histogram,
    detect_peaks,
    label_and_split,
    otsu_threshold,
    select_peaks,
    smooth,
)
from .topomap import TopoMap, assemble, export, import_topomap
from .volumes import Volume, grow_volumes, volume_size
from .voxelgrid import OccupancyGrid, is_occupied, neighbors4, rasterize

__version__ = "0.1.0"

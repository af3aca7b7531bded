"""8-bit raster label image I/O.

Label images carry one integer label per pixel (0 = background or
occupied, 1..255 = segment labels). The first axis of the arrays used
throughout the package is x, so images transpose on write to match the
usual row-major raster convention: pixel row = y (top row = max y),
column = x.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def write_label_image(labels: np.ndarray, path) -> None:
    """Write an (nx, ny) non-negative label array as 8-bit grayscale PNG."""
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() > 255:
        raise ValueError(f"labels must be within 0..255, got {labels.min()}..{labels.max()}")
    img = labels.astype(np.uint8).T[::-1, :]  # x right, y up
    Image.fromarray(img, mode="L").save(Path(path), format="PNG")


def read_label_image(path) -> np.ndarray:
    """Read a grayscale raster back into an (nx, ny) label array."""
    img = Image.open(Path(path)).convert("L")
    arr = np.asarray(img, dtype=np.int64)
    return arr[::-1, :].T


def occupancy_to_raster(free: np.ndarray) -> np.ndarray:
    """Binary occupancy view: occupied 0, free 255."""
    return np.where(free, 255, 0).astype(np.int64)

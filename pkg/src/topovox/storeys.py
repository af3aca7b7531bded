"""Floor/ceiling detection from the z-density histogram and storey splitting.

Horizontal surfaces concentrate points into narrow height bands, so the
z histogram of a building scan spikes at every floor and ceiling. Each
candidate window size smooths the histogram with a normalized box
filter, thresholds it with Otsu's method and keeps the above-threshold
intervals as peaks. Window sizes that agree on peak count and peak
placement are clustered, the largest cluster wins, and its smallest
window supplies the final peak centers, which alternate floor, ceiling,
floor, ... from the bottom up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .errors import DegenerateSignalError, EmptyCloudError, PeakAlternationError

DEFAULT_BIN_SIZE = 0.01
DEFAULT_WINDOW_SIZES = (0.02, 0.04, 0.06, 0.08, 0.10)
DEFAULT_SLAB_MARGIN = 0.30


@dataclass(frozen=True)
class HeightHistogram:
    bin_size: float
    z_min: float
    counts: np.ndarray  # int64, one entry per bin

    def bin_center(self, i: int) -> float:
        return self.z_min + (i + 0.5) * self.bin_size


@dataclass(frozen=True)
class Peak:
    start_bin: int
    end_bin: int  # inclusive
    center_height: float


@dataclass(frozen=True)
class PeakCandidateSet:
    window_size: float
    peaks: tuple[Peak, ...]  # disjoint, sorted by start_bin


@dataclass(frozen=True)
class StoreySlab:
    floor_height: float
    ceiling_height: float
    index: int

    def __post_init__(self):
        if not self.floor_height < self.ceiling_height:
            raise ValueError("floor must lie below ceiling")


def build_z_histogram(cloud: PointCloud, bin_size: float = DEFAULT_BIN_SIZE) -> HeightHistogram:
    """Histogram of point heights; bin i covers [z_min + i*b, z_min + (i+1)*b)."""
    if bin_size <= 0:
        raise ValueError("bin_size must be positive")
    if len(cloud) == 0:
        raise EmptyCloudError("cannot histogram an empty cloud")
    z = cloud.points[:, 2]
    z_min = float(z.min())
    idx = np.floor((z - z_min) / bin_size).astype(np.int64)
    n_bins = int(idx.max()) + 1
    counts = np.bincount(idx, minlength=n_bins)
    return HeightHistogram(bin_size=bin_size, z_min=z_min, counts=counts)


def smooth(hist: HeightHistogram, c: float) -> np.ndarray:
    """Box-average the counts over bins within c/2 of each bin center.

    Borders renormalize by the actual window width, so a constant signal
    stays constant all the way to the edges.
    """
    if c < hist.bin_size:
        raise ValueError("window size must be at least one bin")
    half = int(np.floor(c / (2.0 * hist.bin_size) + 1e-9))
    counts = hist.counts.astype(np.float64)
    if half == 0:
        return counts.copy()
    n = len(counts)
    window = 2 * half + 1
    padded = np.zeros(n + 2 * half)
    padded[half : half + n] = counts
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    sums = csum[window:] - csum[:-window]
    # effective window width shrinks near the borders
    left = np.minimum(np.arange(n), half)
    right = np.minimum(n - 1 - np.arange(n), half)
    widths = left + right + 1
    return sums / widths


def otsu_threshold(signal: np.ndarray) -> float:
    """Threshold maximizing between-class variance on a 256-level quantization.

    Returns the cut in signal units, placed halfway between the chosen
    quantization level and the next, so "value > threshold" reproduces
    the winning class split.
    """
    signal = np.asarray(signal, dtype=np.float64)
    s_min, s_max = float(signal.min()), float(signal.max())
    if s_min == s_max:
        raise DegenerateSignalError("signal has a single distinct value")
    levels = np.clip(((signal - s_min) / (s_max - s_min) * 255).astype(np.int64), 0, 255)
    hist = np.bincount(levels, minlength=256).astype(np.float64)
    total = hist.sum()
    omega = np.cumsum(hist) / total
    mu = np.cumsum(hist * np.arange(256)) / total
    mu_total = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_b = (mu_total * omega - mu) ** 2 / (omega * (1.0 - omega))
    sigma_b = np.nan_to_num(sigma_b[:-1], nan=-1.0, posinf=-1.0)
    t = int(np.argmax(sigma_b))  # first maximizer wins on ties
    return s_min + (t + 0.5) * (s_max - s_min) / 255.0


def _peaks_above(signal: np.ndarray, threshold: float, hist: HeightHistogram) -> tuple[Peak, ...]:
    above = signal > threshold
    peaks = []
    start = None
    for i, flag in enumerate(above):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            peaks.append(_make_peak(signal, start, i - 1, hist))
            start = None
    if start is not None:
        peaks.append(_make_peak(signal, start, len(above) - 1, hist))
    return tuple(peaks)


def _make_peak(signal: np.ndarray, start: int, end: int, hist: HeightHistogram) -> Peak:
    # Center on the maximum of the smoothed signal, not the interval
    # midpoint: intervals truncate asymmetrically at the histogram borders
    # (the bottom floor always sits in bin 0) while the maximum stays put.
    seg = signal[start : end + 1]
    at_max = np.flatnonzero(seg == seg.max())
    mid = (at_max[0] + at_max[-1]) / 2.0
    center = hist.z_min + (start + mid + 0.5) * hist.bin_size
    return Peak(start_bin=start, end_bin=end, center_height=center)


def detect_peaks(hist: HeightHistogram, window_sizes=DEFAULT_WINDOW_SIZES) -> list[PeakCandidateSet]:
    """One candidate set per usable window size; degenerate windows are dropped."""
    sizes = sorted(window_sizes)
    if not sizes:
        raise ValueError("window_sizes must be non-empty")
    out = []
    for c in sizes:
        smoothed = smooth(hist, c)
        try:
            thr = otsu_threshold(smoothed)
        except DegenerateSignalError:
            continue
        out.append(PeakCandidateSet(window_size=c, peaks=_peaks_above(smoothed, thr, hist)))
    if not out:
        raise DegenerateSignalError("every window size produced a degenerate signal")
    return out


def _compatible(a: PeakCandidateSet, b: PeakCandidateSet) -> bool:
    # same peak count and pairwise interval overlap, matched in sorted order
    if len(a.peaks) != len(b.peaks) or not a.peaks:
        return False
    for pa, pb in zip(a.peaks, b.peaks):
        if pa.start_bin > pb.end_bin or pb.start_bin > pa.end_bin:
            return False
    return True


def select_peaks(candidates: list[PeakCandidateSet]) -> list[float]:
    """Pick peak centers from the winning window-size cluster.

    Window sizes cluster when they see the same number of peaks in
    overlapping histogram intervals; the most populous cluster wins
    (ties prefer the cluster holding the smallest window) and its
    smallest window size contributes the centers.
    """
    if not candidates:
        raise ValueError("no peak candidate sets")
    sets = sorted(candidates, key=lambda s: s.window_size)
    n = len(sets)
    # connected components of the pairwise compatibility relation
    cluster_of = list(range(n))

    def find(i):
        while cluster_of[i] != i:
            cluster_of[i] = cluster_of[cluster_of[i]]
            i = cluster_of[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if _compatible(sets[i], sets[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    cluster_of[max(ri, rj)] = min(ri, rj)

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    # order: biggest first, then smallest contained window size
    best = sorted(
        clusters.values(), key=lambda idxs: (-len(idxs), sets[idxs[0]].window_size)
    )[0]
    chosen = sets[min(best)]
    return [p.center_height for p in chosen.peaks]


def write_debug_outputs(hist: HeightHistogram, window_sizes, out_dir) -> list:
    """Dump the histogram, smoothed signals and peaks for inspection.

    Writes histogram.csv, smoothed_<c>.csv per usable window size and
    peaks.json; handy for plotting why a storey split came out wrong.
    """
    import json
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created = []
    hist_path = out_dir / "histogram.csv"
    with open(hist_path, "w") as f:
        f.write("bin_center_m,count\n")
        for i, count in enumerate(hist.counts):
            f.write(f"{hist.bin_center(i):.6f},{int(count)}\n")
    created.append(hist_path)
    candidates = detect_peaks(hist, window_sizes)
    for cset in candidates:
        signal = smooth(hist, cset.window_size)
        path = out_dir / f"smoothed_{int(round(cset.window_size * 1000)):04d}mm.csv"
        with open(path, "w") as f:
            f.write("bin_center_m,value\n")
            for i, value in enumerate(signal):
                f.write(f"{hist.bin_center(i):.6f},{value:.6f}\n")
        created.append(path)
    peaks_path = out_dir / "peaks.json"
    peaks_path.write_text(
        json.dumps(
            {
                "selected": select_peaks(candidates),
                "per_window": {
                    str(c.window_size): [
                        {"start_bin": p.start_bin, "end_bin": p.end_bin,
                         "center_height": p.center_height}
                        for p in c.peaks
                    ]
                    for c in candidates
                },
            },
            indent=1,
            sort_keys=True,
        )
        + "\n"
    )
    created.append(peaks_path)
    return created


def label_and_split(
    cloud: PointCloud,
    peak_heights,
    bin_size: float = DEFAULT_BIN_SIZE,
    slab_margin: float = DEFAULT_SLAB_MARGIN,
) -> list[tuple[StoreySlab, PointCloud]]:
    """Pair peaks into floor/ceiling slabs bottom-up and split the cloud.

    Storey k takes points with z in [floor_k - bin_size,
    ceiling_k + slab_margin]; overlapping windows resolve to the lower
    storey so every point lands in at most one storey.
    """
    peaks = sorted(float(h) for h in peak_heights)
    if len(peaks) < 2 or len(peaks) % 2 != 0:
        raise PeakAlternationError(peaks)
    slabs = [
        StoreySlab(floor_height=peaks[2 * k], ceiling_height=peaks[2 * k + 1], index=k)
        for k in range(len(peaks) // 2)
    ]
    pts = cloud.points
    taken = np.zeros(len(pts), dtype=bool)
    out = []
    for slab in slabs:
        lo = slab.floor_height - bin_size
        hi = slab.ceiling_height + slab_margin
        mask = (pts[:, 2] >= lo) & (pts[:, 2] <= hi) & ~taken
        taken |= mask
        out.append((slab, PointCloud(pts[mask])))
    return out

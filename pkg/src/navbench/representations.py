"""LiDAR state encodings and the next-step prediction error metric.

Two encodings are supported: the normalized 1D range vector, and a polar
"rings" occupancy grid with even angular sections and exponentially spaced
radial intervals (finer resolution near the robot).  Grid cells take one of
three values: 0 free, 0.5 unknown, 1 occupied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import TWO_PI, Scan

FREE = 0.0
OCCUPIED = 1.0
UNKNOWN = 0.5


@dataclass(frozen=True)
class RingsConfig:
    """Polar grid geometry; radial bin edges are r_min * (r_max/r_min)**(k/n)."""

    n_angular: int = 64
    n_radial: int = 64
    r_min: float = 0.3
    r_max: float = 25.0

    def __post_init__(self) -> None:
        if self.n_angular < 1 or self.n_radial < 1:
            raise ValueError("grid dimensions must be >= 1")
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")

    def radial_edges(self) -> np.ndarray:
        """All n_radial + 1 bin edges, from r_min to r_max."""
        k = np.arange(self.n_radial + 1, dtype=float)
        return self.r_min * (self.r_max / self.r_min) ** (k / self.n_radial)


@dataclass
class RingsGrid:
    """n_angular x n_radial matrix of {0, 0.5, 1} cell values (angular-major)."""

    cells: np.ndarray

    def flat(self) -> np.ndarray:
        """Row-major (angular-major) flattened view used for serialization."""
        return self.cells.reshape(-1)


@dataclass
class PredictedState:
    """One predicted next observation, shaped like the chosen representation."""

    s_l_hat: np.ndarray
    s_r_hat: np.ndarray


def normalize_1d(scan: Scan, max_range: float) -> np.ndarray:
    """Scale ranges into [0, 1]; assumes ranges already lie in [0, max_range]."""
    return np.asarray(scan.ranges, dtype=float) / float(max_range)


def radial_bin(distance: float, cfg: RingsConfig) -> int | None:
    """Index of the radial bin containing distance, or None when beyond r_max.

    Bins are half-open [e_k, e_{k+1}); distances below r_min collapse into
    bin 0.  A log-space closed form finds the bin, then a one-step correction
    pins down edge-adjacent floating point cases so the result always matches
    a linear search over the edge array.
    """
    d = float(distance)
    if d < 0.0:
        raise ValueError("distance must be >= 0")
    if d >= cfg.r_max:
        return None
    if d < cfg.r_min:
        return 0
    log_step = math.log(cfg.r_max / cfg.r_min) / cfg.n_radial
    k = int(math.floor(math.log(d / cfg.r_min) / log_step))
    k = min(max(k, 0), cfg.n_radial - 1)
    edges = cfg.radial_edges()
    while k + 1 < cfg.n_radial and d >= edges[k + 1]:
        k += 1
    while k > 0 and d < edges[k]:
        k -= 1
    return k


def _radial_bins_array(distances: np.ndarray, cfg: RingsConfig) -> np.ndarray:
    """Vectorized radial_bin; uses the same edge array so results agree exactly."""
    edges = cfg.radial_edges()
    k = np.searchsorted(edges, distances, side="right") - 1
    return np.clip(k, 0, cfg.n_radial - 1)


def rings_encode(
    scan: Scan,
    beam_angles: np.ndarray,
    cfg: RingsConfig | None = None,
) -> RingsGrid:
    """Encode a scan into the polar rings grid.

    beam_angles are robot-relative beam directions (radians).  Each angular
    column takes the minimum range of its beams as the hit distance: cells
    whose outer edge lies at or inside the hit are free, the cell containing
    the hit is occupied, and everything beyond it is unknown.  A full-range
    return marks the whole column free; columns covered by no beam (partial
    field of view) stay unknown.
    """
    if cfg is None:
        cfg = RingsConfig()
    ranges = np.asarray(scan.ranges, dtype=float)
    col_width = TWO_PI / cfg.n_angular
    angles = np.asarray(beam_angles, dtype=float) % TWO_PI
    cols = np.floor(angles / col_width).astype(int)
    # Pin down edge-adjacent floating point cases against the column grid
    # j * col_width so an angle exactly on an edge lands in the upper column.
    cols = np.where((cols + 1) * col_width <= angles, cols + 1, cols)
    cols = np.where(cols * col_width > angles, cols - 1, cols)
    cols = np.clip(cols, 0, cfg.n_angular - 1)

    hits = np.full(cfg.n_angular, np.inf)
    np.minimum.at(hits, cols, ranges)

    cells = np.full((cfg.n_angular, cfg.n_radial), UNKNOWN)
    covered = ~np.isinf(hits)
    edges = cfg.radial_edges()

    finite = hits[covered]
    free_all = finite >= cfg.r_max
    occ_bins = _radial_bins_array(finite, cfg)

    sub = np.full((len(finite), cfg.n_radial), UNKNOWN)
    outer = edges[1:][None, :]
    sub[outer <= finite[:, None]] = FREE
    sub[np.arange(len(finite)), occ_bins] = OCCUPIED
    sub[free_all, :] = FREE
    cells[covered] = sub
    return RingsGrid(cells=cells)


def worldmodel_error(
    predictions: Sequence[PredictedState],
    truth: Sequence[tuple[np.ndarray, np.ndarray]],
) -> tuple[float, float]:
    """Mean squared next-step prediction error, split by state component.

    Returns (lidar error, goal-velocity error) averaged over all steps and all
    elements.  Errors from different LiDAR representations are not comparable
    to each other; compare within one representation only.
    """
    if len(predictions) != len(truth):
        raise ValueError(
            f"sequence length mismatch: {len(predictions)} predictions, "
            f"{len(truth)} ground-truth steps"
        )
    if not predictions:
        raise ValueError("empty sequences")
    sl_sq = 0.0
    sl_n = 0
    sr_sq = 0.0
    sr_n = 0
    for pred, (sl_true, sr_true) in zip(predictions, truth):
        sl_hat = np.asarray(pred.s_l_hat, dtype=float)
        sr_hat = np.asarray(pred.s_r_hat, dtype=float)
        sl_true = np.asarray(sl_true, dtype=float)
        sr_true = np.asarray(sr_true, dtype=float)
        if sl_hat.shape != sl_true.shape:
            raise ValueError(
                f"lidar shape mismatch: {sl_hat.shape} vs {sl_true.shape}"
            )
        if sr_hat.shape != sr_true.shape:
            raise ValueError(
                f"goal-velocity shape mismatch: {sr_hat.shape} vs {sr_true.shape}"
            )
        sl_sq += float(((sl_hat - sl_true) ** 2).sum())
        sl_n += sl_true.size
        sr_sq += float(((sr_hat - sr_true) ** 2).sum())
        sr_n += sr_true.size
    return sl_sq / sl_n, sr_sq / sr_n

"""Windowed mean/std statistics under exclusion masks.

The contextual detector clauses compare a pixel against the mean and standard
deviation of a square neighborhood computed over background pixels only (fire
candidates, water, and nodata are excluded). Summed-area tables over the value
field, its square, and the inclusion indicator make any axis-aligned window
query O(1), so scenes with tens of thousands of candidates stay fast.

Conventions fixed here:
  - Windows are clipped at grid borders, never padded or mirrored; padding
    would inject synthetic background into the statistics.
  - Standard deviation is the population form sqrt(max(0, S2/N - mean^2)).
    The max(0, .) absorbs float rounding for near-constant windows.
  - A window with zero included pixels yields no statistics (None).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class WindowStats:
    """Summary of the included pixels inside one (clipped) square window."""

    mean: float
    std: float
    valid_count: int
    window_side: int


class ExclusionSAT:
    """Summed-area tables of a value field gated by an inclusion mask.

    Excluded pixels contribute nothing to sums or counts. The tables are
    immutable after construction; queries are pure and thread-safe.
    """

    __slots__ = ("sum", "sum_sq", "count", "height", "width")

    def __init__(self, values: np.ndarray, include: np.ndarray):
        if values.shape != include.shape:
            raise ValueError(
                f"values shape {values.shape} does not match include shape {include.shape}"
            )
        if values.ndim != 2:
            raise ValueError("ExclusionSAT requires 2-D grids")
        self.height, self.width = values.shape
        v = np.where(include, values.astype(np.float64, copy=False), 0.0)
        inc = include.astype(np.int64)

        self.sum = np.zeros((self.height + 1, self.width + 1), dtype=np.float64)
        self.sum_sq = np.zeros_like(self.sum)
        self.count = np.zeros((self.height + 1, self.width + 1), dtype=np.int64)
        np.cumsum(np.cumsum(v, axis=0), axis=1, out=self.sum[1:, 1:])
        np.cumsum(np.cumsum(v * v, axis=0), axis=1, out=self.sum_sq[1:, 1:])
        np.cumsum(np.cumsum(inc, axis=0), axis=1, out=self.count[1:, 1:])

    def rect_query(self, r0, c0, r1, c1):
        """Sum, sum of squares, and count over the half-open box [r0,r1)x[c0,c1).

        Bounds may be scalars or equal-shaped integer arrays; results follow.
        Callers are responsible for clipping bounds to the grid.
        """
        s = self.sum[r1, c1] - self.sum[r0, c1] - self.sum[r1, c0] + self.sum[r0, c0]
        s2 = self.sum_sq[r1, c1] - self.sum_sq[r0, c1] - self.sum_sq[r1, c0] + self.sum_sq[r0, c0]
        n = self.count[r1, c1] - self.count[r0, c1] - self.count[r1, c0] + self.count[r0, c0]
        return s, s2, n


def build_exclusion_sat(values: np.ndarray, include: np.ndarray) -> ExclusionSAT:
    """Build summed-area tables for `values` restricted to `include` pixels."""
    return ExclusionSAT(values, include)


def _clip_window(sat: ExclusionSAT, rows, cols, half):
    r0 = np.maximum(rows - half, 0)
    c0 = np.maximum(cols - half, 0)
    r1 = np.minimum(rows + half + 1, sat.height)
    c1 = np.minimum(cols + half + 1, sat.width)
    return r0, c0, r1, c1


def _check_center(sat: ExclusionSAT, row: int, col: int) -> None:
    if not (0 <= row < sat.height and 0 <= col < sat.width):
        raise ValueError(
            f"window center ({row}, {col}) outside grid {sat.height}x{sat.width}"
        )


def window_stats(
    sat: ExclusionSAT, center: tuple[int, int], half_width: int
) -> WindowStats | None:
    """Mean/std/count of included pixels in the square window around `center`.

    The window spans (2*half_width+1)^2 pixels, clipped to grid bounds.
    Returns None when the clipped window holds no included pixel.

    Raises:
        ValueError: center outside the grid.
    """
    row, col = center
    _check_center(sat, row, col)
    r0, c0, r1, c1 = _clip_window(sat, row, col, half_width)
    s, s2, n = sat.rect_query(r0, c0, r1, c1)
    if n == 0:
        return None
    mean = s / n
    std = float(np.sqrt(max(0.0, s2 / n - mean * mean)))
    return WindowStats(mean=float(mean), std=std, valid_count=int(n), window_side=2 * half_width + 1)


def adaptive_window_stats(
    sat: ExclusionSAT,
    center: tuple[int, int],
    min_side: int = 5,
    max_side: int = 61,
    min_valid_fraction: float = 0.25,
) -> WindowStats | None:
    """Statistics over the smallest qualifying window in a growing search.

    Sides min_side, min_side+2, ..., max_side are tried in order; the first
    window whose included-pixel count reaches min_valid_fraction of the
    clipped window area wins. The fraction test always uses the clipped area,
    so border pixels are not penalized for the part of the window that falls
    off the grid. Returns None when no side qualifies; callers treat that as
    "no background available".

    Raises:
        ValueError: center outside the grid.
    """
    row, col = center
    _check_center(sat, row, col)
    for side in range(min_side, max_side + 1, 2):
        half = side // 2
        r0, c0, r1, c1 = _clip_window(sat, row, col, half)
        s, s2, n = sat.rect_query(r0, c0, r1, c1)
        area = (r1 - r0) * (c1 - c0)
        if n >= min_valid_fraction * area:
            if n == 0:
                return None
            mean = s / n
            std = float(np.sqrt(max(0.0, s2 / n - mean * mean)))
            return WindowStats(mean=float(mean), std=std, valid_count=int(n), window_side=side)
    return None


def window_stats_batch(sat: ExclusionSAT, rows: np.ndarray, cols: np.ndarray, half):
    """Vectorized window_stats over many centers.

    `half` is a scalar or per-center array of half widths. Returns
    (mean, std, count) arrays; mean/std are NaN where count is 0, and callers
    must gate on count > 0.
    """
    r0, c0, r1, c1 = _clip_window(sat, rows, cols, np.asarray(half))
    s, s2, n = sat.rect_query(r0, c0, r1, c1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = s / n
        var = s2 / n - mean * mean
    std = np.sqrt(np.maximum(var, 0.0))
    return mean, std, n


def adaptive_sides(
    sat: ExclusionSAT,
    rows: np.ndarray,
    cols: np.ndarray,
    min_side: int = 5,
    max_side: int = 61,
    min_valid_fraction: float = 0.25,
) -> np.ndarray:
    """Vectorized side selection for the growing-window search.

    Returns the smallest qualifying odd side per center, or 0 where no side
    up to max_side reaches the inclusion fraction.
    """
    sides = np.zeros(rows.shape, dtype=np.int64)
    pending = np.arange(rows.size)
    for side in range(min_side, max_side + 1, 2):
        if pending.size == 0:
            break
        half = side // 2
        r = rows[pending]
        c = cols[pending]
        r0, c0, r1, c1 = _clip_window(sat, r, c, half)
        n = sat.count[r1, c1] - sat.count[r0, c1] - sat.count[r1, c0] + sat.count[r0, c0]
        area = (r1 - r0) * (c1 - c0)
        qualified = n >= min_valid_fraction * area
        sides[pending[qualified]] = side
        pending = pending[~qualified]
    return sides

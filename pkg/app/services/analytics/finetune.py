"""
Per-plot fine-tuning of range boundaries.

Each plot's top and bottom line moves independently to the minimum of its
triangle-smoothed, normalized local range energy within +-d_ran_gap. The
local energy counts plant pixels with x_left <= x <= x_right over the rows
y_top - d_ran_gap .. y_bot + d_ran_gap (clamped to the mask). Tuning reads
half a kernel beyond that window, so zero padding only applies at the
raster border.

A line whose neighbour side (d_ran_gap rows outside the plot, fully inside
the mask) carries almost no plants keeps its untuned position: next to an
empty plot the smoothed energy has no valley, only a slope into the empty
band.
"""
import logging
from typing import Optional

import numpy as np

from app.config.settings import settings
from app.exceptions import FineTuneError
from app.schemas.plots import PlotBoundary, PlotGrid
from app.services.analytics.comb import TriangleKernel, build_triangle
from app.services.analytics.search import argmin_nearest
from app.services.profiles.energy import Axis, EnergyProfile, NormalizedProfile, normalize
from app.services.raster.io import PlantMask
from app.services.workers import ordered_map

logger = logging.getLogger(__name__)


def smooth(profile: np.ndarray, tri: TriangleKernel) -> np.ndarray:
    """Same-length convolution with zero padding at both ends"""
    full = np.convolve(profile, tri.samples, mode="full")
    return full[tri.half_width:tri.half_width + len(profile)]


class BoundaryTuner:
    """Moves plot top/bottom lines onto the nearest smoothed energy minimum"""

    def __init__(self, d_ran_gap: Optional[int] = None, workers: Optional[int] = None):
        self.d_ran_gap = settings.d_ran_gap if d_ran_gap is None else d_ran_gap
        self.workers = workers
        self.tie_tolerance = settings.tie_tolerance
        self.empty_side_level = settings.empty_side_level

    def local_range_energy(
        self,
        mask: PlantMask,
        plot: PlotBoundary,
        d_ran_gap: Optional[int] = None,
        pad: int = 0,
    ) -> EnergyProfile:
        """Plant counts per row over the plot's columns; pad widens the row window on both sides"""
        d = (self.d_ran_gap if d_ran_gap is None else d_ran_gap) + pad
        height, width = mask.shape
        x_lo, x_hi = max(plot.x_left, 0), min(plot.x_right, width - 1)
        if x_lo > x_hi:
            raise FineTuneError(
                f"plot ({plot.row}, {plot.range}) has no columns inside the {width}-px mask",
                context={"x_left": plot.x_left, "x_right": plot.x_right},
            )
        y_lo, y_hi = max(plot.y_top - d, 0), min(plot.y_bot + d, height - 1)
        if y_lo > y_hi:
            raise FineTuneError(
                f"plot ({plot.row}, {plot.range}) lies outside the {height}-row mask",
                context={"y_top": plot.y_top, "y_bot": plot.y_bot},
            )
        values = mask[y_lo:y_hi + 1, x_lo:x_hi + 1].sum(axis=1, dtype=np.int64)
        return EnergyProfile(Axis.ALONG_Y, values, origin=y_lo)

    def tune_boundary(
        self,
        local: EnergyProfile,
        y: int,
        d_ran_gap: Optional[int] = None,
        tri: Optional[TriangleKernel] = None,
    ) -> int:
        d = self.d_ran_gap if d_ran_gap is None else d_ran_gap
        if d == 0 or len(local) == 0:
            return y
        tri = tri or build_triangle(d)
        smoothed = smooth(normalize(local).values, tri)

        lo = max(y - d, local.origin)
        hi = min(y + d, local.stop - 1)
        if lo > hi:
            return y
        deltas = np.arange(lo - y, hi - y + 1)
        objective = smoothed[y + deltas - local.origin]
        return int(y + deltas[argmin_nearest(deltas, objective, self.tie_tolerance)])

    def neighbour_planted(self, level: NormalizedProfile, lo: int, hi: int, height: int) -> bool:
        """False when rows [lo, hi) lie inside the mask and average below empty_side_level"""
        if lo < 0 or hi > height or lo >= hi:
            return True
        side = level.values[lo - level.origin:hi - level.origin]
        return float(side.mean()) >= self.empty_side_level

    def tune_plot(self, mask: PlantMask, plot: PlotBoundary, tri: TriangleKernel) -> PlotBoundary:
        local = self.local_range_energy(mask, plot, pad=tri.half_width)
        level = normalize(local)
        d, height = self.d_ran_gap, mask.shape[0]

        top, bot = plot.y_top, plot.y_bot
        if self.neighbour_planted(level, plot.y_top - d, plot.y_top, height):
            top = self.tune_boundary(local, plot.y_top, tri=tri)
        else:
            logger.debug(f"Plot (row={plot.row}, range={plot.range}): empty band above, top line kept")
        if self.neighbour_planted(level, plot.y_bot + 1, plot.y_bot + d + 1, height):
            bot = self.tune_boundary(local, plot.y_bot, tri=tri)
        else:
            logger.debug(f"Plot (row={plot.row}, range={plot.range}): empty band below, bottom line kept")
        if top >= bot:
            logger.warning(
                f"Plot (row={plot.row}, range={plot.range}): tuned lines {top} >= {bot}, keeping untuned bounds"
            )
            return plot.model_copy(update={
                "y_top_tuned": plot.y_top, "y_bot_tuned": plot.y_bot, "flagged": True,
            })
        return plot.model_copy(update={"y_top_tuned": top, "y_bot_tuned": bot, "flagged": False})

    def finetune_grid(self, mask: PlantMask, grid: PlotGrid) -> PlotGrid:
        tri = build_triangle(max(self.d_ran_gap, 1))
        tuned = ordered_map(lambda p: self.tune_plot(mask, p, tri), grid.plots, self.workers)
        result = grid.model_copy(update={"plots": tuned})
        moved = sum(1 for p in tuned if (p.y_top_tuned, p.y_bot_tuned) != (p.y_top, p.y_bot))
        logger.info(f"Fine-tuned {len(tuned)} plots: {moved} moved, {len(result.flagged)} flagged")
        return result

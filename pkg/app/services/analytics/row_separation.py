"""
Row separation: crop-set offsets and plot boundary lines per range.

For crop set i of a range the offset dx_i in [-d_gap, d_gap] minimises

    w0 * dx^2 / d_row^2
    + w1 * (2 / d_gap) * <f, h_local  at x_off_i + dx>
    + w2 * (2 / d_gap) * <f, h_global at x_off_i + dx>

with f the modified comb and both profiles normalized; the dot product
aligns f[0] with profile position x_off_i + dx and reads zero outside the
profile. Offsets are solved left to right with x_off_{i+1} = x_off_i + dx_i + d_crop.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from app.config.settings import settings
from app.exceptions import PlotExtractionError, RowSeparationError
from app.schemas.planter import PlanterSpec, RowSepConfig
from app.schemas.plots import CropSetLayout, PlotBoundary, PlotGrid, RangeSeparation
from app.services.analytics.comb import CombFunction, build_modified_comb
from app.services.analytics.search import argmin_nearest, round_half_up
from app.services.profiles.energy import NormalizedProfile, local_row_energy, normalize
from app.services.raster.io import PlantMask
from app.services.workers import ordered_map

logger = logging.getLogger(__name__)


def _window(profile: NormalizedProfile, start: int, length: int) -> np.ndarray:
    """Profile samples at [start, start + length), zero outside the profile"""
    out = np.zeros(length, dtype=np.float64)
    lo = max(start, profile.origin)
    hi = min(start + length, profile.stop)
    if lo < hi:
        out[lo - start:hi - start] = profile.values[lo - profile.origin:hi - profile.origin]
    return out


class RowSeparator:
    """Locates crop sets in each range and derives crop-set and plot boundary lines"""

    def __init__(
        self,
        spec: PlanterSpec,
        field: Tuple[int, int],
        cfg: Optional[RowSepConfig] = None,
        comb: Optional[CombFunction] = None,
        workers: Optional[int] = None,
    ):
        self.spec = spec
        self.m_rows, self.n_ranges = field
        if self.m_rows % spec.c_rows != 0:
            raise RowSeparationError(
                f"M={self.m_rows} rows is not a multiple of C={spec.c_rows}; partial crop sets are unsupported"
            )
        self.cfg = cfg or RowSepConfig()
        self.comb = comb if comb is not None else build_modified_comb(spec)
        self.workers = workers
        self.tie_tolerance = settings.tie_tolerance

    def offset_objective(
        self,
        local: NormalizedProfile,
        global_p: NormalizedProfile,
        x_off: int,
        comb: Optional[CombFunction] = None,
        spec: Optional[PlanterSpec] = None,
        cfg: Optional[RowSepConfig] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """(candidate offsets, objective values) over the full [-d_gap, d_gap] scan"""
        comb = comb or self.comb
        spec = spec or self.spec
        cfg = cfg or self.cfg
        d_gap = spec.d_gap
        width = len(comb)
        start = x_off - d_gap
        length = 2 * d_gap + width
        if start + length <= local.origin or start >= local.stop:
            raise RowSeparationError(
                f"offset search window [{start}, {start + length}) lies outside the profile "
                f"[{local.origin}, {local.stop})",
                context={"x_off": x_off},
            )
        deltas = np.arange(-d_gap, d_gap + 1)
        dot_local = signal.correlate(_window(local, start, length), comb.samples, mode="valid", method="direct")
        dot_global = signal.correlate(_window(global_p, start, length), comb.samples, mode="valid", method="direct")
        objective = (
            cfg.w0 * deltas.astype(np.float64) ** 2 / spec.d_row ** 2
            + cfg.w1 * (2.0 / d_gap) * dot_local
            + cfg.w2 * (2.0 / d_gap) * dot_global
        )
        return deltas, objective

    def optimize_offset(
        self,
        local: NormalizedProfile,
        global_p: NormalizedProfile,
        x_off: int,
        comb: Optional[CombFunction] = None,
        spec: Optional[PlanterSpec] = None,
        cfg: Optional[RowSepConfig] = None,
    ) -> int:
        deltas, objective = self.offset_objective(local, global_p, x_off, comb, spec, cfg)
        return int(deltas[argmin_nearest(deltas, objective, self.tie_tolerance)])

    def layout_range(
        self,
        mask: PlantMask,
        range_bounds: Tuple[int, int],
        global_norm: NormalizedProfile,
        range_index: int = 0,
    ) -> CropSetLayout:
        spec = self.spec
        y_lo, y_hi = range_bounds
        local = normalize(local_row_energy(mask, y_lo, y_hi, workers=1))

        n_sets = self.m_rows // spec.c_rows
        offsets: List[int] = []
        x_off: List[int] = [0]
        for i in range(n_sets):
            dx = self.optimize_offset(local, global_norm, x_off[i])
            if abs(dx) > spec.d_gap:
                raise RowSeparationError(f"crop-set offset {dx} exceeds d_gap", range_index=range_index)
            offsets.append(dx)
            if i + 1 < n_sets:
                x_off.append(x_off[i] + dx + spec.d_crop)

        set_boundaries = [offsets[0]]
        for j in range(1, n_sets):
            # midpoint of the previous set's end x_off[j] and this set's start x_off[j] + dx_j
            set_boundaries.append(round_half_up(x_off[j] + offsets[j] / 2))
        set_boundaries.append(x_off[-1] + offsets[-1] + spec.d_crop)

        plot_boundaries: List[int] = []
        for m in range(self.m_rows + 1):
            k = m % spec.c_rows
            if k == 0:
                plot_boundaries.append(set_boundaries[m // spec.c_rows])
            else:
                plot_boundaries.append(plot_boundaries[m - k] + k * spec.d_row)

        for name, lines in (("crop-set", set_boundaries), ("plot", plot_boundaries)):
            bad = [i for i in range(len(lines) - 1) if lines[i] >= lines[i + 1]]
            if bad:
                raise RowSeparationError(
                    f"{name} boundaries are not strictly increasing at index {bad[0]}",
                    range_index=range_index,
                    context={"offsets": offsets},
                )

        logger.debug(f"Range {range_index}: offsets={offsets}")
        return CropSetLayout(
            range_index=range_index,
            offsets=offsets,
            x_off=x_off,
            set_boundaries=set_boundaries,
            plot_boundaries=plot_boundaries,
        )

    def layout_field(
        self,
        mask: PlantMask,
        ranges: RangeSeparation,
        global_norm: NormalizedProfile,
    ) -> List[CropSetLayout]:
        if ranges.n_ranges != self.n_ranges:
            raise RowSeparationError(
                f"range separation has {ranges.n_ranges} ranges, field expects {self.n_ranges}"
            )

        def one(z: int) -> CropSetLayout:
            try:
                return self.layout_range(mask, ranges.band(z), global_norm, range_index=z)
            except RowSeparationError:
                raise
            except PlotExtractionError as e:
                raise RowSeparationError(str(e), range_index=z) from e

        layouts = ordered_map(one, range(self.n_ranges), self.workers)
        logger.info(f"Row separation: offsets per range {[l.offsets for l in layouts]}")
        return layouts

    def build_grid(self, ranges: RangeSeparation, layouts: List[CropSetLayout]) -> PlotGrid:
        """Untuned M x N grid from the range lines and per-range plot boundaries"""
        plots = []
        for layout in layouts:
            z = layout.range_index
            y_top, y_bot = ranges.band(z)
            for m in range(self.m_rows):
                plots.append(PlotBoundary(
                    row=m,
                    range=z,
                    x_left=layout.plot_boundaries[m],
                    x_right=layout.plot_boundaries[m + 1],
                    y_top=y_top,
                    y_bot=y_bot,
                ))
        return PlotGrid(plots=plots, spec=self.spec, m_rows=self.m_rows, n_ranges=self.n_ranges)


def layouts_frame(layouts: List[CropSetLayout]) -> pd.DataFrame:
    records = []
    for layout in layouts:
        for i, dx in enumerate(layout.offsets):
            records.append({
                "range": layout.range_index,
                "crop_set": i,
                "dx": dx,
                "x_off": layout.x_off[i],
                "set_boundaries": " ".join(map(str, layout.set_boundaries)),
                "plot_boundaries": " ".join(map(str, layout.plot_boundaries)),
            })
    return pd.DataFrame.from_records(
        records, columns=["range", "crop_set", "dx", "x_off", "set_boundaries", "plot_boundaries"]
    )

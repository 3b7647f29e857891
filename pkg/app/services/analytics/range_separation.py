"""
Range separation: N+1 horizontal lines between the N ranges.

The equidistant fit minimises the range energy summed over lines
y0 + n * dy (n = 0..N) by exhaustive search over integer y0 and a 0.5-pixel
dy grid; each line is then moved to the lowest energy within +-D_ran-gap.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.config.settings import settings
from app.exceptions import RangeSeparationError
from app.schemas.planter import RangeSearchBounds
from app.schemas.plots import RangeSeparation
from app.services.analytics.search import argmin_nearest, round_half_up
from app.services.profiles.energy import EnergyProfile
from app.services.workers import ordered_map

logger = logging.getLogger(__name__)

# dy candidates evaluated per vectorised block
_DY_BLOCK = 128


class RangeSeparator:
    """Fits and adjusts the range-separation lines of a range energy profile"""

    def __init__(
        self,
        n_ranges: int,
        bounds: Optional[RangeSearchBounds] = None,
        d_ran_gap: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        if n_ranges < 1:
            raise RangeSeparationError(f"need at least one range, got {n_ranges}")
        self.n_ranges = n_ranges
        self.bounds = bounds or RangeSearchBounds()
        self.d_ran_gap = settings.d_ran_gap if d_ran_gap is None else d_ran_gap
        self.workers = workers

    def fit_equidistant(
        self,
        h_ra: EnergyProfile,
        n_ranges: Optional[int] = None,
        bounds: Optional[RangeSearchBounds] = None,
    ) -> Tuple[int, float]:
        """
        (y0, dy) minimising sum_n h_ra(round(y0 + n * dy)).
        Ties: smallest y0, then smallest dy.
        """
        n_ranges = self.n_ranges if n_ranges is None else n_ranges
        bounds = self.bounds if bounds is None else bounds
        values = h_ra.values.astype(np.int64)
        length = len(values)
        y0_max, dy_min, dy_max = bounds.resolve(length, n_ranges)

        y0s = np.arange(0, min(y0_max, length - 1) + 1, dtype=np.int64)
        dys = np.arange(round(2 * dy_min), round(2 * dy_max) + 1, dtype=np.int64) / 2.0
        if len(y0s) == 0 or len(dys) == 0:
            raise RangeSeparationError(
                "range search box is empty",
                context={"y0_max": y0_max, "dy_min": dy_min, "dy_max": dy_max},
            )
        steps = np.arange(n_ranges + 1, dtype=np.float64)
        sentinel = np.iinfo(np.int64).max

        def scan(block: np.ndarray) -> Tuple[int, int, float]:
            # positions: (dy, y0, line)
            pos = np.floor(
                y0s[None, :, None] + steps[None, None, :] * block[:, None, None] + 0.5
            ).astype(np.int64)
            feasible = pos[..., -1] <= length - 1
            cost = values[np.minimum(pos, length - 1)].sum(axis=-1)
            cost[~feasible] = sentinel
            best = cost.min()
            if best == sentinel:
                return sentinel, 0, 0.0
            dy_idx, y0_idx = np.nonzero(cost == best)
            first = np.lexsort((dy_idx, y0_idx))[0]
            return int(best), int(y0s[y0_idx[first]]), float(block[dy_idx[first]])

        blocks = [dys[i:i + _DY_BLOCK] for i in range(0, len(dys), _DY_BLOCK)]
        results = ordered_map(scan, blocks, self.workers)
        cost, y0, dy = min(results, key=lambda r: (r[0], r[1], r[2]))
        if cost == sentinel:
            raise RangeSeparationError(
                "no (y0, dy) in the search box keeps all range lines inside the profile",
                context={"height": length, "n_ranges": n_ranges, "y0_max": y0_max,
                         "dy_min": dy_min, "dy_max": dy_max},
            )
        logger.info(f"Equidistant range fit: y0={y0}, dy={dy} (energy {cost})")
        return y0 + h_ra.origin, dy

    def adjust_lines(
        self,
        h_ra: EnergyProfile,
        equidistant: Sequence[int],
        d_ran_gap: Optional[int] = None,
    ) -> List[int]:
        """Move each line to the lowest energy within +-d_ran_gap (integer scan)"""
        d_ran_gap = self.d_ran_gap if d_ran_gap is None else d_ran_gap
        values = h_ra.values
        last = len(values) - 1
        adjusted = []
        for y in equidistant:
            local = min(max(y - h_ra.origin, 0), last)
            lo, hi = max(local - d_ran_gap, 0), min(local + d_ran_gap, last)
            deltas = np.arange(lo - local, hi - local + 1)
            best = argmin_nearest(deltas, values[local + deltas])
            adjusted.append(int(local + deltas[best] + h_ra.origin))
        return adjusted

    def separate(self, h_ra: EnergyProfile) -> RangeSeparation:
        y0, dy = self.fit_equidistant(h_ra)
        equidistant = [round_half_up(y0 + n * dy) for n in range(self.n_ranges + 1)]
        adjusted = self.adjust_lines(h_ra, equidistant)
        for z in range(self.n_ranges):
            if adjusted[z] >= adjusted[z + 1]:
                raise RangeSeparationError(
                    f"adjusted range lines {adjusted[z]} and {adjusted[z + 1]} are not increasing",
                    range_index=z,
                )
        logger.info(f"Range lines: equidistant={equidistant} adjusted={adjusted}")
        return RangeSeparation(y0=y0, delta_y=dy, equidistant=equidistant, adjusted=adjusted)


def ranges_frame(separation: RangeSeparation) -> pd.DataFrame:
    return pd.DataFrame({
        "index": np.arange(len(separation.adjusted)),
        "y_equidistant": separation.equidistant,
        "y_adjusted": separation.adjusted,
    })

"""
Energy functions: plant-pixel projections of the mask.

    range energy         h_ra(y)    = sum over x of mask(x, y)
    global row energy    h_rogl(x)  = sum over y of mask(x, y)
    local row energy     h_ro(x)    = sum over y in [y_lo, y_hi] of mask(x, y)

Counts are int64, so strip-parallel summation is exact.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from app.exceptions import ProfileError
from app.services.raster.io import PlantMask
from app.services.workers import ordered_map, resolve_workers

logger = logging.getLogger(__name__)

# rows per summation strip
_STRIP_ROWS = 2048


class Axis(str, Enum):
    ALONG_X = "x"
    ALONG_Y = "y"


@dataclass(frozen=True)
class EnergyProfile:
    axis: Axis
    values: np.ndarray
    origin: int = 0

    def __len__(self) -> int:
        return len(self.values)

    @property
    def stop(self) -> int:
        """One past the last covered coordinate"""
        return self.origin + len(self.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "index": np.arange(self.origin, self.stop),
            "value": self.values,
        })


@dataclass(frozen=True)
class NormalizedProfile:
    axis: Axis
    values: np.ndarray
    origin: int = 0

    def __len__(self) -> int:
        return len(self.values)

    @property
    def stop(self) -> int:
        return self.origin + len(self.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "index": np.arange(self.origin, self.stop),
            "normalized": self.values,
        })


def _strips(height: int):
    return [(start, min(start + _STRIP_ROWS, height)) for start in range(0, height, _STRIP_ROWS)]


def _check_mask(mask: PlantMask) -> None:
    if mask.ndim != 2 or mask.size == 0:
        raise ProfileError(f"expected a nonempty 2-D mask, got shape {mask.shape}")


def range_energy(mask: PlantMask, workers: Optional[int] = None) -> EnergyProfile:
    _check_mask(mask)
    parts = ordered_map(
        lambda band: mask[band[0]:band[1]].sum(axis=1, dtype=np.int64),
        _strips(mask.shape[0]),
        workers,
    )
    return EnergyProfile(Axis.ALONG_Y, np.concatenate(parts))


def _column_counts(mask: PlantMask, y_lo: int, y_hi: int, workers: Optional[int]) -> np.ndarray:
    strips = [(a + y_lo, b + y_lo) for a, b in _strips(y_hi - y_lo + 1)]
    if len(strips) == 1 or resolve_workers(workers) == 1:
        return mask[y_lo:y_hi + 1].sum(axis=0, dtype=np.int64)
    parts = ordered_map(lambda band: mask[band[0]:band[1]].sum(axis=0, dtype=np.int64), strips, workers)
    return np.sum(parts, axis=0, dtype=np.int64)


def global_row_energy(mask: PlantMask, workers: Optional[int] = None) -> EnergyProfile:
    _check_mask(mask)
    return EnergyProfile(Axis.ALONG_X, _column_counts(mask, 0, mask.shape[0] - 1, workers))


def local_row_energy(mask: PlantMask, y_lo: int, y_hi: int, workers: Optional[int] = None) -> EnergyProfile:
    """Column counts restricted to rows y_lo..y_hi inclusive"""
    _check_mask(mask)
    if not 0 <= y_lo <= y_hi < mask.shape[0]:
        raise ProfileError(
            f"row band [{y_lo}, {y_hi}] is inverted or outside a mask of height {mask.shape[0]}",
            context={"y_lo": y_lo, "y_hi": y_hi},
        )
    return EnergyProfile(Axis.ALONG_X, _column_counts(mask, y_lo, y_hi, workers))


def normalize(profile: EnergyProfile) -> NormalizedProfile:
    """
    Clip-normalize to [0, 1] against the profile mean K:
    1 where value >= K, value / K elsewhere; all zeros when K == 0.
    """
    if len(profile) == 0:
        raise ProfileError("cannot normalize an empty profile")
    values = profile.values.astype(np.float64)
    k = values.mean()
    if k <= 0:
        logger.debug(f"All-zero {profile.axis.value} profile at origin {profile.origin}")
        return NormalizedProfile(profile.axis, np.zeros_like(values), profile.origin)
    return NormalizedProfile(profile.axis, np.where(values >= k, 1.0, values / k), profile.origin)

"""
Comb matched filter over one crop set.

The raw comb has C+1 unit spikes at multiples of d_row from the crop-set left
edge (the last one clamped to d_crop - 1). The modified comb widens every
spike by convolving with a unit-height triangle of the plot-gap width and is
trimmed back to d_crop samples.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from app.exceptions import CombSpecError
from app.schemas.planter import PlanterSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CombFunction:
    samples: np.ndarray
    spike_positions: Tuple[int, ...]
    modified: bool = False

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class TriangleKernel:
    width: int
    samples: np.ndarray

    @property
    def half_width(self) -> int:
        return (len(self.samples) - 1) // 2


def build_comb(spec: PlanterSpec) -> CombFunction:
    if spec.c_rows * spec.d_row > spec.d_crop:
        raise CombSpecError(
            f"comb spikes at multiples of d_row={spec.d_row} overrun the crop-set width {spec.d_crop}",
            context={"c_rows": spec.c_rows, "d_row": spec.d_row, "d_crop": spec.d_crop},
        )
    positions = tuple(min(k * spec.d_row, spec.d_crop - 1) for k in range(spec.c_rows + 1))
    samples = np.zeros(spec.d_crop, dtype=np.float64)
    samples[list(positions)] = 1.0
    return CombFunction(samples=samples, spike_positions=positions)


def build_triangle(width: int) -> TriangleKernel:
    """Peak-1 triangle sampled on an odd grid (even widths round up); endpoints stay above zero"""
    if width < 1:
        raise CombSpecError(f"triangle width must be at least 1, got {width}")
    n = width if width % 2 == 1 else width + 1
    half = (n - 1) // 2
    offsets = np.arange(-half, half + 1)
    return TriangleKernel(width=width, samples=1.0 - np.abs(offsets) / (half + 1))


def modify_comb(comb: CombFunction, tri: TriangleKernel) -> CombFunction:
    """Full convolution, centre-aligned and trimmed to the comb length, clipped to [0, 1]"""
    full = np.convolve(comb.samples, tri.samples, mode="full")
    trimmed = full[tri.half_width:tri.half_width + len(comb.samples)]
    return CombFunction(
        samples=np.clip(trimmed, 0.0, 1.0),
        spike_positions=comb.spike_positions,
        modified=True,
    )


def build_modified_comb(spec: PlanterSpec) -> CombFunction:
    return modify_comb(build_comb(spec), build_triangle(spec.d_gap))


def comb_frame(raw: CombFunction, modified: CombFunction) -> pd.DataFrame:
    return pd.DataFrame({
        "index": np.arange(len(raw)),
        "raw": raw.samples,
        "modified": modified.samples,
    })

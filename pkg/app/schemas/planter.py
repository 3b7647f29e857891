import logging
import math
from typing import Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.config.settings import settings

logger = logging.getLogger(__name__)


class PlanterSpec(BaseModel):
    """Planting-pattern geometry in pixels (comb parameters + range-gap bound)"""

    c_rows: int = Field(..., ge=1, description="Rows planted per planter pass (C)")
    d_crop: int = Field(..., gt=0, description="Crop-set width")
    d_row: int = Field(..., gt=0, description="Plot pitch within a crop set")
    d_gap: int = Field(..., gt=0, description="Plot gap width")
    d_ran_gap: int = Field(
        default_factory=lambda: settings.d_ran_gap,
        ge=0,
        description="Maximum range-boundary correction",
    )

    @model_validator(mode="after")
    def check_geometry(self) -> "PlanterSpec":
        if self.d_gap >= self.d_row:
            raise ValueError(f"d_gap ({self.d_gap}) must be smaller than d_row ({self.d_row})")
        span = self.c_rows * self.d_row
        if abs(self.d_crop - span) > self.d_gap:
            logger.warning(
                f"Crop-set width {self.d_crop} differs from C*d_row={span} by more than d_gap={self.d_gap}"
            )
        return self


class RowSepConfig(BaseModel):
    """Weights of the crop-set offset objective"""

    w0: float = Field(default_factory=lambda: settings.omega_0, ge=0)
    w1: float = Field(default_factory=lambda: settings.omega_1, ge=0)
    w2: float = Field(default_factory=lambda: settings.omega_2, ge=0)

    @model_validator(mode="after")
    def check_any_positive(self) -> "RowSepConfig":
        if max(self.w0, self.w1, self.w2) <= 0:
            raise ValueError("at least one of w0, w1, w2 must be positive")
        return self


class RangeSearchBounds(BaseModel):
    """
    Search box for the equidistant range-line fit.
    Unset fields fall back to bounds derived from the profile height.
    """

    y0_max: Optional[int] = Field(default=None, ge=0)
    dy_min: Optional[float] = Field(default=None, gt=0)
    dy_max: Optional[float] = Field(default=None, gt=0)

    @field_validator("dy_min", "dy_max")
    @classmethod
    def half_pixel_grid(cls, v):
        if v is not None and not float(2 * v).is_integer():
            raise ValueError("range-search step bounds must lie on the 0.5 pixel grid")
        return v

    def resolve(self, height: int, n_ranges: int) -> Tuple[int, float, float]:
        """Concrete (y0_max, dy_min, dy_max) for a profile of the given height"""
        y0_max = self.y0_max if self.y0_max is not None else height // (n_ranges + 1)
        dy_min = self.dy_min
        if dy_min is None:
            dy_min = max(0.5, math.ceil(height / (n_ranges + 1)) / 2)
        dy_max = self.dy_max
        if dy_max is None:
            dy_max = math.floor(3 * height / n_ranges) / 2
        return int(y0_max), float(dy_min), float(dy_max)

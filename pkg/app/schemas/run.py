from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.config.settings import settings
from app.schemas.planter import PlanterSpec, RangeSearchBounds, RowSepConfig
from app.schemas.plots import RegionOfInterest


class InputConfig(BaseModel):
    path: Path
    kind: Literal["rgb", "mask"] = "rgb"
    roi: Optional[RegionOfInterest] = None


class SegmentationConfig(BaseModel):
    method: Literal["hue", "otsu"] = "hue"
    hue_lo: int = Field(default_factory=lambda: settings.hue_lo, ge=0, le=179)
    hue_hi: int = Field(default_factory=lambda: settings.hue_hi, ge=0, le=179)

    @model_validator(mode="after")
    def check_band(self) -> "SegmentationConfig":
        if self.hue_lo > self.hue_hi:
            raise ValueError(f"hue_lo ({self.hue_lo}) exceeds hue_hi ({self.hue_hi})")
        return self


class FieldConfig(BaseModel):
    m_rows: int = Field(..., gt=0, description="Rows (M) in the region of interest")
    n_ranges: int = Field(..., gt=0, description="Ranges (N) in the region of interest")


class OutputConfig(BaseModel):
    directory: Path = Path("cope_output")
    overlay: bool = False
    chips: bool = False
    dump_profiles: bool = False


class RuntimeConfig(BaseModel):
    workers: Optional[int] = Field(default_factory=lambda: settings.workers, ge=1)


class RunConfig(BaseModel):
    """A full extraction run, as read from the TOML run file"""

    input: InputConfig
    segmentation: SegmentationConfig = Field(default_factory=SegmentationConfig)
    planter: PlanterSpec
    field: FieldConfig
    weights: RowSepConfig = Field(default_factory=RowSepConfig)
    range_search: RangeSearchBounds = Field(default_factory=RangeSearchBounds)
    output: OutputConfig = Field(default_factory=OutputConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)

    @model_validator(mode="after")
    def check_crop_sets(self) -> "RunConfig":
        if self.field.m_rows % self.planter.c_rows != 0:
            raise ValueError(
                f"field.m_rows ({self.field.m_rows}) must be a multiple of "
                f"planter.c_rows ({self.planter.c_rows})"
            )
        return self


def _default_synth_spec() -> PlanterSpec:
    return PlanterSpec(c_rows=4, d_crop=761, d_row=190, d_gap=31)


class SynthConfig(BaseModel):
    """Synthetic field description; defaults mirror a 20-row x 5-range trial"""

    spec: PlanterSpec = Field(default_factory=_default_synth_spec)
    m_rows: int = Field(20, gt=0)
    n_ranges: int = Field(5, gt=0)
    crop_set_offsets: Optional[List[List[int]]] = None
    max_offset: Optional[int] = Field(default=None, ge=0)
    range_positions: Optional[List[Tuple[int, int]]] = None
    range_pitch: int = Field(600, gt=0)
    range_gap: int = Field(61, gt=0)
    margin_x: Optional[int] = Field(default=None, ge=0)
    plant_density: float = Field(0.6, ge=0, le=1)
    noise_density: float = Field(0.01, ge=0, le=1)
    empty_plot_fraction: float = Field(0.0, ge=0, le=1)
    germination_jitter: int = Field(0, ge=0)
    seed: int = Field(default_factory=lambda: settings.synth_seed, ge=0, lt=2**64)

    @field_validator("range_positions")
    @classmethod
    def ordered_bands(cls, v):
        if v is None:
            return v
        previous_bot = -1
        for top, bot in v:
            if top >= bot or top <= previous_bot:
                raise ValueError("range_positions must be disjoint, increasing (top, bottom) bands")
            previous_bot = bot
        return v

    @model_validator(mode="after")
    def check_field(self) -> "SynthConfig":
        if self.m_rows % self.spec.c_rows != 0:
            raise ValueError(f"m_rows ({self.m_rows}) must be a multiple of c_rows ({self.spec.c_rows})")
        if self.noise_density >= self.plant_density and self.plant_density > 0:
            raise ValueError("noise_density must be below plant_density")
        if self.range_gap >= self.range_pitch:
            raise ValueError("range_gap must be smaller than range_pitch")
        n_sets = self.m_rows // self.spec.c_rows
        if self.crop_set_offsets is not None:
            if len(self.crop_set_offsets) != self.n_ranges:
                raise ValueError("crop_set_offsets needs one offset list per range")
            for offsets in self.crop_set_offsets:
                if len(offsets) != n_sets:
                    raise ValueError(f"each range needs {n_sets} crop-set offsets")
                if any(abs(dx) > self.spec.d_gap for dx in offsets):
                    raise ValueError("crop-set offsets must satisfy |dx| <= d_gap")
        if self.range_positions is not None and len(self.range_positions) != self.n_ranges:
            raise ValueError("range_positions needs one band per range")
        return self

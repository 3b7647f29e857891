from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from app.schemas.planter import PlanterSpec


class RegionOfInterest(BaseModel):
    x0: int = Field(0, ge=0)
    y0: int = Field(0, ge=0)
    width: int = Field(..., gt=0)
    height: int = Field(..., gt=0)

    def fits(self, width: int, height: int) -> bool:
        return self.x0 + self.width <= width and self.y0 + self.height <= height


class RangeSeparation(BaseModel):
    y0: int
    delta_y: float
    equidistant: List[int]
    adjusted: List[int]

    @model_validator(mode="after")
    def check_lengths(self) -> "RangeSeparation":
        if len(self.equidistant) != len(self.adjusted):
            raise ValueError("equidistant and adjusted line lists differ in length")
        return self

    @property
    def n_ranges(self) -> int:
        return len(self.adjusted) - 1

    def band(self, z: int) -> Tuple[int, int]:
        """Inclusive row band of range z"""
        return self.adjusted[z], self.adjusted[z + 1]


class CropSetLayout(BaseModel):
    range_index: int
    offsets: List[int]
    x_off: List[int]
    set_boundaries: List[int]
    plot_boundaries: List[int]


class PlotBoundary(BaseModel):
    row: int = Field(..., ge=0)
    range: int = Field(..., ge=0)
    x_left: int
    x_right: int
    y_top: int
    y_bot: int
    y_top_tuned: Optional[int] = None
    y_bot_tuned: Optional[int] = None
    flagged: bool = False

    @model_validator(mode="after")
    def check_rectangle(self) -> "PlotBoundary":
        if self.x_left >= self.x_right:
            raise ValueError(f"plot ({self.row}, {self.range}): x_left must be < x_right")
        if self.y_top >= self.y_bot:
            raise ValueError(f"plot ({self.row}, {self.range}): y_top must be < y_bot")
        if self.y_top_tuned is None:
            self.y_top_tuned = self.y_top
        if self.y_bot_tuned is None:
            self.y_bot_tuned = self.y_bot
        return self

    @property
    def key(self) -> Tuple[int, int]:
        return self.row, self.range

    def rectangle(self, tuned: bool = True) -> Tuple[int, int, int, int]:
        """(x_left, y_top, x_right, y_bot), half-open"""
        if tuned:
            return self.x_left, self.y_top_tuned, self.x_right, self.y_bot_tuned
        return self.x_left, self.y_top, self.x_right, self.y_bot


class PlotGrid(BaseModel):
    plots: List[PlotBoundary]
    spec: PlanterSpec
    m_rows: int = Field(..., gt=0)
    n_ranges: int = Field(..., gt=0)
    provenance: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_complete(self) -> "PlotGrid":
        keys = {p.key for p in self.plots}
        if len(keys) != len(self.plots):
            raise ValueError("duplicate (row, range) pairs in plot grid")
        if len(self.plots) != self.m_rows * self.n_ranges:
            raise ValueError(
                f"plot grid holds {len(self.plots)} plots, expected {self.m_rows}x{self.n_ranges}"
            )
        return self

    def by_key(self) -> Dict[Tuple[int, int], PlotBoundary]:
        return {p.key: p for p in self.plots}

    @property
    def flagged(self) -> List[Tuple[int, int]]:
        return [p.key for p in self.plots if p.flagged]


class PlotRecord(BaseModel):
    """One plot in the interchange document; rectangles are half-open, ROI-local"""

    row: int = Field(..., ge=0)
    range: int = Field(..., ge=0)
    x_left: int
    x_right: int
    y_top: int
    y_bot: int
    source_x_left: Optional[int] = None
    source_x_right: Optional[int] = None
    source_y_top: Optional[int] = None
    source_y_bot: Optional[int] = None
    y_top_untuned: Optional[int] = None
    y_bot_untuned: Optional[int] = None
    flagged: bool = False

    @property
    def key(self) -> Tuple[int, int]:
        return self.row, self.range

    def rectangle(self) -> Tuple[int, int, int, int]:
        return self.x_left, self.y_top, self.x_right, self.y_bot


class PlotDocument(BaseModel):
    roi: Optional[RegionOfInterest] = None
    plots: List[PlotRecord]


class GroundTruthGrid(BaseModel):
    plots: List[PlotRecord]

    @model_validator(mode="after")
    def check_rectangles(self) -> "GroundTruthGrid":
        seen = set()
        for plot in self.plots:
            if plot.key in seen:
                raise ValueError(f"duplicate ground-truth plot (row={plot.row}, range={plot.range})")
            seen.add(plot.key)
            if plot.x_left >= plot.x_right or plot.y_top >= plot.y_bot:
                raise ValueError(f"invalid ground-truth rectangle (row={plot.row}, range={plot.range})")
        return self

    def by_key(self) -> Dict[Tuple[int, int], PlotRecord]:
        return {p.key: p for p in self.plots}

# Schema exports
from app.schemas.planter import PlanterSpec, RowSepConfig, RangeSearchBounds
from app.schemas.plots import (
    RegionOfInterest,
    RangeSeparation,
    CropSetLayout,
    PlotBoundary,
    PlotGrid,
    PlotRecord,
    PlotDocument,
    GroundTruthGrid,
)
from app.schemas.run import RunConfig, SynthConfig

__all__ = [
    "PlanterSpec",
    "RowSepConfig",
    "RangeSearchBounds",
    "RegionOfInterest",
    "RangeSeparation",
    "CropSetLayout",
    "PlotBoundary",
    "PlotGrid",
    "PlotRecord",
    "PlotDocument",
    "GroundTruthGrid",
    "RunConfig",
    "SynthConfig",
]

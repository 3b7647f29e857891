# Analytics services exports
from app.services.analytics.comb import (
    CombFunction,
    TriangleKernel,
    build_comb,
    build_triangle,
    modify_comb,
    build_modified_comb,
)
from app.services.analytics.range_separation import RangeSeparator, ranges_frame
from app.services.analytics.row_separation import RowSeparator, layouts_frame
from app.services.analytics.finetune import BoundaryTuner

__all__ = [
    "CombFunction",
    "TriangleKernel",
    "build_comb",
    "build_triangle",
    "modify_comb",
    "build_modified_comb",
    "RangeSeparator",
    "ranges_frame",
    "RowSeparator",
    "layouts_frame",
    "BoundaryTuner",
]

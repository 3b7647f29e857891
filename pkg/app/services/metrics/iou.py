"""
Plot-extraction accuracy: intersection over union against ground truth.

Rectangles are (x_left, y_top, x_right, y_bot) with half-open pixel
intervals, so width = x_right - x_left. Extracted and reference plots are
paired by (row, range) index.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from app.exceptions import MetricsError, MissingPlotsError
from app.schemas.plots import GroundTruthGrid, PlotGrid

logger = logging.getLogger(__name__)

Rectangle = Tuple[int, int, int, int]
PlotKey = Tuple[int, int]

REQUIRED_COLUMNS = ["row", "range", "x_left", "x_right", "y_top", "y_bot"]


def _area(rect: Rectangle) -> int:
    x_left, y_top, x_right, y_bot = rect
    width, height = x_right - x_left, y_bot - y_top
    if width <= 0 or height <= 0:
        raise MetricsError(f"rectangle {tuple(rect)} has zero area")
    return width * height


def iou(a: Rectangle, b: Rectangle) -> float:
    area_a, area_b = _area(a), _area(b)
    x1, y1 = max(a[0], b[0]), max(a[1], b[1])
    x2, y2 = min(a[2], b[2]), min(a[3], b[3])
    if x2 <= x1 or y2 <= y1:
        return 0.0
    intersection = (x2 - x1) * (y2 - y1)
    return intersection / (area_a + area_b - intersection)


class PlotIou(BaseModel):
    row: int
    range: int
    iou: float


class IouReport(BaseModel):
    mean_iou: float
    count: int
    below_half: int
    histogram: List[int]
    bin_edges: List[float]
    plots: List[PlotIou]


def _rectangles(grid: Union[PlotGrid, GroundTruthGrid]) -> Dict[PlotKey, Rectangle]:
    return {key: plot.rectangle() for key, plot in grid.by_key().items()}


def per_plot_iou(
    grid: Union[PlotGrid, GroundTruthGrid],
    gt: GroundTruthGrid,
    keys: Optional[Iterable[PlotKey]] = None,
) -> List[PlotIou]:
    """IoU for each ground-truth plot (or the given subset), in (range, row) order"""
    extracted = _rectangles(grid)
    truth = _rectangles(gt)
    keys = sorted(truth if keys is None else keys, key=lambda k: (k[1], k[0]))
    unknown = [k for k in keys if k not in truth]
    if unknown:
        raise MetricsError(f"{len(unknown)} requested plots are not in the ground truth", context={"first": unknown[0]})
    missing = [k for k in keys if k not in extracted]
    if missing:
        raise MissingPlotsError(missing)
    return [PlotIou(row=k[0], range=k[1], iou=iou(extracted[k], truth[k])) for k in keys]


def mean_iou(
    grid: Union[PlotGrid, GroundTruthGrid],
    gt: GroundTruthGrid,
    keys: Optional[Iterable[PlotKey]] = None,
) -> float:
    scores = per_plot_iou(grid, gt, keys)
    if not scores:
        raise MetricsError("ground truth holds no plots to evaluate")
    return float(np.mean([s.iou for s in scores]))


def iou_report(
    grid: Union[PlotGrid, GroundTruthGrid],
    gt: GroundTruthGrid,
    keys: Optional[Iterable[PlotKey]] = None,
) -> IouReport:
    scores = per_plot_iou(grid, gt, keys)
    if not scores:
        raise MetricsError("ground truth holds no plots to evaluate")
    values = np.array([s.iou for s in scores])
    counts, edges = np.histogram(values, bins=10, range=(0.0, 1.0))
    report = IouReport(
        mean_iou=float(values.mean()),
        count=len(values),
        below_half=int((values < 0.5).sum()),
        histogram=counts.tolist(),
        bin_edges=edges.tolist(),
        plots=scores,
    )
    logger.info(f"Mean IoU {report.mean_iou:.4f} over {report.count} plots ({report.below_half} below 0.5)")
    return report


def load_plots(path: Union[str, Path]) -> GroundTruthGrid:
    """Read a plot document (JSON object or array, or CSV) as a reference grid"""
    path = Path(path)
    if not path.is_file():
        raise MetricsError(f"plot file not found: {path}")
    try:
        if path.suffix.lower() == ".csv":
            frame = pd.read_csv(path)
            absent = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
            if absent:
                raise MetricsError(f"plot CSV {path} lacks columns {absent}")
            records = frame[REQUIRED_COLUMNS].astype(int).to_dict(orient="records")
        else:
            data = json.loads(path.read_text())
            records = data.get("plots") if isinstance(data, dict) else data
            if not isinstance(records, list):
                raise MetricsError(f"plot JSON {path} holds no plot list")
        return GroundTruthGrid.model_validate({"plots": records})
    except (ValidationError, ValueError) as e:
        raise MetricsError(f"plot file {path} does not match the plot schema: {e}") from e

"""Writers for plot documents, CSV tables, run reports, overlays and plot chips."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from PIL import Image, ImageDraw

from app.schemas.plots import PlotDocument, PlotGrid, PlotRecord, RegionOfInterest
from app.services.raster.io import PlantMask, RgbImage

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PLOT_COLUMNS = [
    "row", "range", "x_left", "x_right", "y_top", "y_bot",
    "source_x_left", "source_x_right", "source_y_top", "source_y_bot",
    "y_top_untuned", "y_bot_untuned", "flagged",
]

# cycled by (row + range) % 8
OVERLAY_PALETTE = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
]
RANGE_LINE_COLOR = (255, 255, 255)


def plot_records(grid: PlotGrid, roi: Optional[RegionOfInterest] = None) -> List[PlotRecord]:
    """Tuned plot rectangles in (range, row) order, with source-image coordinates"""
    dx = roi.x0 if roi else 0
    dy = roi.y0 if roi else 0
    records = []
    for plot in sorted(grid.plots, key=lambda p: (p.range, p.row)):
        x_left, y_top, x_right, y_bot = plot.rectangle(tuned=True)
        records.append(PlotRecord(
            row=plot.row, range=plot.range,
            x_left=x_left, x_right=x_right, y_top=y_top, y_bot=y_bot,
            source_x_left=x_left + dx, source_x_right=x_right + dx,
            source_y_top=y_top + dy, source_y_bot=y_bot + dy,
            y_top_untuned=plot.y_top, y_bot_untuned=plot.y_bot,
            flagged=plot.flagged,
        ))
    return records


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_plots_json(document: PlotDocument, path: PathLike) -> Path:
    path = _prepare(path)
    path.write_text(document.model_dump_json(indent=2) + "\n")
    return path


def plots_frame(records: Sequence[PlotRecord]) -> pd.DataFrame:
    return pd.DataFrame.from_records([r.model_dump() for r in records], columns=PLOT_COLUMNS)


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = _prepare(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def write_json(payload: Dict[str, Any], path: PathLike) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _as_rgb(base: Union[RgbImage, PlantMask]) -> Image.Image:
    if base.ndim == 2:
        return Image.fromarray((base > 0).astype(np.uint8) * 255, mode="L").convert("RGB")
    return Image.fromarray(np.ascontiguousarray(base, dtype=np.uint8), mode="RGB")


def render_overlay(
    base: Union[RgbImage, PlantMask],
    records: Iterable[PlotRecord],
    range_lines: Optional[Sequence[int]] = None,
    line_width: int = 3,
) -> Image.Image:
    """
    Colour-coded plot rectangles over the ROI raster or mask.

    Args:
        base: ROI-local RGB image, or a plant mask drawn white on black
        records: plots in ROI-local coordinates
        range_lines: adjusted range-separation lines to draw across the image
        line_width: outline width in pixels

    Returns:
        RGB PIL image
    """
    img = _as_rgb(base)
    draw = ImageDraw.Draw(img)
    width = img.width
    for y in range_lines or ():
        draw.line(((0, y), (width - 1, y)), fill=RANGE_LINE_COLOR, width=1)
    for rec in records:
        color = OVERLAY_PALETTE[(rec.row + rec.range) % len(OVERLAY_PALETTE)]
        draw.rectangle(((rec.x_left, rec.y_top), (rec.x_right - 1, rec.y_bot - 1)), outline=color, width=line_width)
    return img


def write_overlay(image: Image.Image, path: PathLike) -> Path:
    path = _prepare(path)
    image.save(path)
    return path


def chip_name(rec: PlotRecord) -> str:
    return f"range_{rec.range:03d}_row_{rec.row:03d}.png"


def write_chips(image: RgbImage, records: Iterable[PlotRecord], directory: PathLike) -> List[Path]:
    """One PNG per plot cut from the ROI image; rectangles are clipped to the raster"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    height, width = image.shape[:2]
    written = []
    for rec in records:
        x0, x1 = max(rec.x_left, 0), min(rec.x_right, width)
        y0, y1 = max(rec.y_top, 0), min(rec.y_bot, height)
        if x0 >= x1 or y0 >= y1:
            logger.warning(f"Plot (row={rec.row}, range={rec.range}) lies outside the raster; no chip written")
            continue
        path = directory / chip_name(rec)
        Image.fromarray(np.ascontiguousarray(image[y0:y1, x0:x1]), mode="RGB").save(path)
        written.append(path)
    logger.info(f"Wrote {len(written)} plot chips to {directory}")
    return written

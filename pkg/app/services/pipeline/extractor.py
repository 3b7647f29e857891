"""
End-to-end plot extraction:

    load -> segment -> profiles -> range_sep -> comb -> row_sep -> finetune

Every stage runs under ``PlotExtractor.stage`` so errors carry the stage name
and the run report gets per-stage wall-clock timings.
"""
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

from app.exceptions import PlotExtractionError, ProcessingError
from app.schemas.plots import CropSetLayout, PlotDocument, PlotGrid, RangeSeparation
from app.schemas.run import RunConfig
from app.services.analytics.comb import CombFunction, build_comb, build_modified_comb, comb_frame
from app.services.analytics.finetune import BoundaryTuner
from app.services.analytics.range_separation import RangeSeparator, ranges_frame
from app.services.analytics.row_separation import RowSeparator, layouts_frame
from app.services.pipeline import exporters
from app.services.profiles.energy import (
    EnergyProfile,
    NormalizedProfile,
    global_row_energy,
    normalize,
    range_energy,
)
from app.services.raster.io import PlantMask, RgbImage, load_image, load_mask
from app.services.raster.segmentation import PlantSegmenter, crop

logger = logging.getLogger(__name__)


@dataclass
class ExtractionResult:
    grid: PlotGrid
    ranges: RangeSeparation
    layouts: List[CropSetLayout]
    mask: PlantMask
    image: Optional[RgbImage] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def offsets(self) -> List[List[int]]:
        return [layout.offsets for layout in self.layouts]


@dataclass
class Profiles:
    range_energy: EnergyProfile
    row_energy: EnergyProfile
    row_normalized: NormalizedProfile


class PlotExtractor:
    """Runs the extraction pipeline for one run configuration"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.workers = config.runtime.workers
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        logger.info(f"Stage '{name}' started")
        start = time.perf_counter()
        try:
            yield
        except PlotExtractionError as e:
            if e.stage is None:
                e.stage = name
            raise
        except Exception as e:
            raise ProcessingError(f"unexpected {type(e).__name__}: {e}", stage=name) from e
        finally:
            self.timings[name] = time.perf_counter() - start
        logger.info(f"Stage '{name}' finished in {self.timings[name]:.3f}s")

    def load_mask(self) -> Tuple[PlantMask, Optional[RgbImage]]:
        """(ROI mask, ROI RGB image or None)"""
        source = self.config.input
        with self.stage("load"):
            if source.kind == "mask":
                mask, image = load_mask(source.path), None
                if source.roi is not None:
                    mask = crop(mask, source.roi)
            else:
                image = load_image(source.path)
                if source.roi is not None:
                    image = crop(image, source.roi)
                mask = None
        if mask is None:
            seg = self.config.segmentation
            with self.stage("segment"):
                mask = PlantSegmenter(seg.method, seg.hue_lo, seg.hue_hi).segment(image)
        return mask, image

    def profiles(self, mask: PlantMask) -> Profiles:
        with self.stage("profiles"):
            h_ra = range_energy(mask, workers=self.workers)
            h_ro = global_row_energy(mask, workers=self.workers)
            return Profiles(h_ra, h_ro, normalize(h_ro))

    def run(self) -> ExtractionResult:
        cfg = self.config
        self.timings = {}
        mask, image = self.load_mask()
        profiles = self.profiles(mask)

        with self.stage("range_sep"):
            separator = RangeSeparator(
                cfg.field.n_ranges, cfg.range_search, cfg.planter.d_ran_gap, workers=self.workers
            )
            ranges = separator.separate(profiles.range_energy)

        with self.stage("comb"):
            comb: CombFunction = build_modified_comb(cfg.planter)

        with self.stage("row_sep"):
            rows = RowSeparator(
                cfg.planter, (cfg.field.m_rows, cfg.field.n_ranges), cfg.weights, comb, workers=self.workers
            )
            layouts = rows.layout_field(mask, ranges, profiles.row_normalized)
            grid = rows.build_grid(ranges, layouts)

        with self.stage("finetune"):
            grid = BoundaryTuner(cfg.planter.d_ran_gap, workers=self.workers).finetune_grid(mask, grid)
            grid = grid.model_copy(update={"provenance": cfg.model_dump(mode="json")})

        logger.info(
            f"Extracted {len(grid.plots)} plots ({cfg.field.m_rows} rows x {cfg.field.n_ranges} ranges), "
            f"{len(grid.flagged)} flagged"
        )
        return ExtractionResult(grid, ranges, layouts, mask, image, dict(self.timings))

    def report(self, result: ExtractionResult) -> Dict[str, Any]:
        return {
            "config": self.config.model_dump(mode="json"),
            "timings": result.timings,
            "range_lines": {
                "y0": result.ranges.y0,
                "delta_y": result.ranges.delta_y,
                "equidistant": result.ranges.equidistant,
                "adjusted": result.ranges.adjusted,
            },
            "offsets": {str(layout.range_index): layout.offsets for layout in result.layouts},
            "flagged": [{"row": r, "range": z} for r, z in result.grid.flagged],
            "plot_count": len(result.grid.plots),
        }

    def write_outputs(self, result: ExtractionResult) -> Dict[str, Path]:
        """Plot JSON/CSV, range and layout tables, run report, optional overlay and chips"""
        out = self.config.output
        directory = Path(out.directory)
        records = exporters.plot_records(result.grid, self.config.input.roi)
        written = {
            "plots_json": exporters.write_plots_json(
                PlotDocument(roi=self.config.input.roi, plots=records), directory / "plots.json"
            ),
            "plots_csv": exporters.write_frame(exporters.plots_frame(records), directory / "plots.csv"),
            "ranges_csv": exporters.write_frame(ranges_frame(result.ranges), directory / "ranges.csv"),
            "layouts_csv": exporters.write_frame(layouts_frame(result.layouts), directory / "layouts.csv"),
        }
        if out.overlay:
            base = result.image if result.image is not None else result.mask
            overlay = exporters.render_overlay(base, records, result.ranges.adjusted)
            written["overlay"] = exporters.write_overlay(overlay, directory / "overlay.png")
        if out.chips:
            if result.image is None:
                logger.warning("Plot chips need an RGB input; skipping chips for mask input")
            else:
                exporters.write_chips(result.image, records, directory / "chips")
                written["chips"] = directory / "chips"
        if out.dump_profiles:
            written.update(self.write_profiles(result.mask, directory / "profiles"))
        written["report"] = exporters.write_json(self.report(result), directory / "report.json")
        logger.info(f"Wrote outputs to {directory}")
        return written

    def write_profiles(self, mask: PlantMask, directory: Path) -> Dict[str, Path]:
        """Energy profiles and comb tables; runs no optimisation"""
        profiles = self.profiles(mask)
        with self.stage("comb"):
            raw, modified = build_comb(self.config.planter), build_modified_comb(self.config.planter)
        row_frame = profiles.row_energy.to_frame()
        row_frame["normalized"] = profiles.row_normalized.values
        range_frame = profiles.range_energy.to_frame()
        range_frame["normalized"] = normalize(profiles.range_energy).values
        return {
            "range_energy": exporters.write_frame(range_frame, directory / "range_energy.csv"),
            "row_energy": exporters.write_frame(row_frame, directory / "row_energy.csv"),
            "comb": exporters.write_frame(comb_frame(raw, modified), directory / "comb.csv"),
        }

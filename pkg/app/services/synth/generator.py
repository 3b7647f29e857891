"""
Synthetic grid-planted fields with known plot boundaries.

Geometry (all pixels):
    - ranges: plants of range z occupy rows [top_z, bot_z); by default
      top_z = z*P + G//2 + 1 and bot_z = (z+1)*P - G//2 for pitch P and
      range gap G, giving a raster N*P + 1 rows tall (height = bot_last + top_0)
    - crop sets: set i of a range starts at x_off_i + dx_i with
      x_off_0 = 0 and x_off_{i+1} = x_off_i + dx_i + d_crop; its plot gaps
      are d_gap columns centred on start + k*d_row, k = 0..C
    - a plot with germination delay j starts j rows below top_z

Random draws come from numpy's PCG64 in a fixed order: default crop-set
offsets, background noise (512-row strips, top to bottom), empty-plot flags,
germination delays, then plot fills in range-major, row-minor order. Pixel
draws are float32 uniforms compared with ``< density``.

Ground-truth lines sit at gap centres: range lines at the midpoint between
the last plant row above and the first plant row below (0 and height-1 at
the outer edges), crop-set edge lines as the extractor models them
(dx_0, midpoints between sets, end of the last set), and plot lines inside
a crop set at start + k*d_row.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from app.exceptions import SynthGeometryError
from app.schemas.plots import GroundTruthGrid, PlotRecord
from app.schemas.run import SynthConfig
from app.services.analytics.search import round_half_up
from app.services.raster.io import PlantMask

logger = logging.getLogger(__name__)

_NOISE_STRIP_ROWS = 512


@dataclass
class SyntheticField:
    mask: PlantMask
    truth: GroundTruthGrid
    offsets: List[List[int]]
    # (row, range, x0, y0, x1, y1) half-open planted rectangles, before density sampling
    planted: List[Tuple[int, int, int, int, int, int]] = field(default_factory=list)
    empty: List[Tuple[int, int]] = field(default_factory=list)
    jitter: Optional[np.ndarray] = None

    @property
    def non_empty(self) -> List[Tuple[int, int]]:
        empty = set(self.empty)
        return [p.key for p in self.truth.plots if p.key not in empty]


class FieldGenerator:
    """Draws a synthetic plant mask and its ground-truth plot grid"""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.spec = cfg.spec
        self.n_sets = cfg.m_rows // cfg.spec.c_rows

    def range_bands(self) -> Tuple[List[Tuple[int, int]], int]:
        """Plant row bands per range and the raster height"""
        cfg = self.cfg
        if cfg.range_positions is not None:
            bands = [tuple(b) for b in cfg.range_positions]
        else:
            if cfg.range_gap % 2 == 0:
                raise SynthGeometryError(f"range_gap must be odd to centre the gap lines, got {cfg.range_gap}")
            half = cfg.range_gap // 2
            bands = [(z * cfg.range_pitch + half + 1, (z + 1) * cfg.range_pitch - half) for z in range(cfg.n_ranges)]
        height = bands[-1][1] + bands[0][0]
        if bands[0][0] < 0:
            raise SynthGeometryError("range bands must start inside the raster")
        return bands, height

    def draw_offsets(self, rng: np.random.Generator) -> List[List[int]]:
        cfg = self.cfg
        if cfg.crop_set_offsets is not None:
            return [list(o) for o in cfg.crop_set_offsets]
        bound = cfg.max_offset if cfg.max_offset is not None else self.spec.d_gap // 6
        bound = min(bound, self.spec.d_gap)
        offsets = rng.integers(-bound, bound + 1, size=(cfg.n_ranges, self.n_sets))
        offsets[:, 0] = np.abs(offsets[:, 0])
        return offsets.tolist()

    def column_geometry(self, offsets: List[int]) -> Tuple[List[int], List[int], List[int]]:
        """(crop-set starts, truth plot lines, crop-set lines) for one range"""
        spec = self.spec
        x_off = [0]
        for dx in offsets[:-1]:
            x_off.append(x_off[-1] + dx + spec.d_crop)
        starts = [x + dx for x, dx in zip(x_off, offsets)]

        set_lines = [offsets[0]]
        set_lines += [round_half_up(x_off[j] + offsets[j] / 2) for j in range(1, self.n_sets)]
        set_lines.append(x_off[-1] + offsets[-1] + spec.d_crop)

        lines = []
        for m in range(self.cfg.m_rows + 1):
            i, k = divmod(m, spec.c_rows)
            lines.append(set_lines[i] if k == 0 else starts[i] + k * spec.d_row)
        if set_lines[0] < 0:
            raise SynthGeometryError(f"first crop-set offset {offsets[0]} places plants left of the raster")
        if any(a >= b for a, b in zip(lines, lines[1:])):
            raise SynthGeometryError(f"crop-set offsets {offsets} produce overlapping plots")
        return starts, lines, set_lines

    def plant_columns(self, start: int, k: int) -> Tuple[int, int]:
        """Half-open plant columns of plot k in a crop set starting at ``start``"""
        spec = self.spec
        left_line = start + k * spec.d_row
        right_line = left_line + spec.d_row
        return left_line + (spec.d_gap - spec.d_gap // 2), right_line - spec.d_gap // 2

    def build(self) -> SyntheticField:
        cfg = self.cfg
        spec = self.spec
        rng = np.random.default_rng(cfg.seed)

        offsets = self.draw_offsets(rng)
        bands, height = self.range_bands()
        geometry = [self.column_geometry(o) for o in offsets]
        margin = cfg.margin_x if cfg.margin_x is not None else spec.d_gap
        width = max(lines[-1] for _, lines, _ in geometry) + margin

        mask = np.zeros((height, width), dtype=np.uint8)
        if cfg.noise_density > 0:
            for y in range(0, height, _NOISE_STRIP_ROWS):
                rows = min(_NOISE_STRIP_ROWS, height - y)
                mask[y:y + rows] = rng.random((rows, width), dtype=np.float32) < cfg.noise_density

        empty_flags = rng.random((cfg.n_ranges, cfg.m_rows)) < cfg.empty_plot_fraction
        if cfg.germination_jitter > 0:
            jitter = rng.integers(0, cfg.germination_jitter + 1, size=(cfg.n_ranges, cfg.m_rows))
        else:
            jitter = np.zeros((cfg.n_ranges, cfg.m_rows), dtype=np.int64)

        planted = []
        for z, (top, bot) in enumerate(bands):
            starts = geometry[z][0]
            for m in range(cfg.m_rows):
                y0 = top + int(jitter[z, m])
                if y0 >= bot:
                    raise SynthGeometryError(
                        f"germination delay {int(jitter[z, m])} empties plot (row={m}, range={z})"
                    )
                x0, x1 = self.plant_columns(starts[m // spec.c_rows], m % spec.c_rows)
                if empty_flags[z, m]:
                    continue
                fill = rng.random((bot - y0, x1 - x0), dtype=np.float32) < cfg.plant_density
                mask[y0:bot, x0:x1] |= fill.astype(np.uint8)
                planted.append((m, z, x0, y0, x1, bot))

        truth = self.truth(bands, height, geometry, jitter)
        empty = [(m, z) for z in range(cfg.n_ranges) for m in range(cfg.m_rows) if empty_flags[z, m]]
        logger.info(
            f"Generated {width}x{height} synthetic field: {cfg.m_rows} rows x {cfg.n_ranges} ranges, "
            f"{len(empty)} empty plots, seed {cfg.seed}"
        )
        return SyntheticField(mask=mask, truth=truth, offsets=offsets, planted=planted, empty=empty, jitter=jitter)

    def truth(self, bands, height: int, geometry, jitter: np.ndarray) -> GroundTruthGrid:
        cfg = self.cfg

        def top_line(z: int, m: int) -> int:
            if z == 0:
                return 0
            first_plant = bands[z][0] + int(jitter[z, m])
            return (bands[z - 1][1] - 1 + first_plant) // 2

        plots = []
        for z in range(cfg.n_ranges):
            lines = geometry[z][1]
            for m in range(cfg.m_rows):
                y_top = top_line(z, m)
                y_bot = top_line(z + 1, m) if z + 1 < cfg.n_ranges else height - 1
                plots.append(PlotRecord(
                    row=m, range=z,
                    x_left=lines[m], x_right=lines[m + 1],
                    y_top=y_top, y_bot=y_bot,
                    source_x_left=lines[m], source_x_right=lines[m + 1],
                    source_y_top=y_top, source_y_bot=y_bot,
                ))
        return GroundTruthGrid(plots=plots)

    def generate(self) -> Tuple[PlantMask, GroundTruthGrid]:
        synthetic = self.build()
        return synthetic.mask, synthetic.truth


def generate(cfg: SynthConfig) -> Tuple[PlantMask, GroundTruthGrid]:
    return FieldGenerator(cfg).generate()


def extract_config_toml(cfg: SynthConfig, mask_path: Union[str, Path], output_dir: Union[str, Path]) -> str:
    """Run file that extracts the generated field with its own planter geometry"""
    spec = cfg.spec
    return "\n".join([
        "[input]",
        f'path = "{Path(mask_path).as_posix()}"',
        'kind = "mask"',
        "",
        "[planter]",
        f"c_rows = {spec.c_rows}",
        f"d_crop = {spec.d_crop}",
        f"d_row = {spec.d_row}",
        f"d_gap = {spec.d_gap}",
        f"d_ran_gap = {spec.d_ran_gap}",
        "",
        "[field]",
        f"m_rows = {cfg.m_rows}",
        f"n_ranges = {cfg.n_ranges}",
        "",
        "[output]",
        f'directory = "{Path(output_dir).as_posix()}"',
        "overlay = true",
        "",
    ])

import tomllib

import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import SynthGeometryError
from app.schemas.run import RunConfig, SynthConfig
from app.services.synth import FieldGenerator, extract_config_toml, generate
from tests.conftest import small_field_config


class TestFieldGeometry:
    """Known-answer geometry of a small clean field"""

    def test_raster_size(self, clean_field):
        assert clean_field.mask.shape == (121, 88)

    def test_truth_lines(self, clean_field):
        truth = clean_field.truth.by_key()
        assert len(truth) == 8
        lines0 = [truth[(m, 0)].x_left for m in range(4)] + [truth[(3, 0)].x_right]
        lines1 = [truth[(m, 1)].x_left for m in range(4)] + [truth[(3, 1)].x_right]
        assert lines0 == [2, 22, 43, 62, 83]
        assert lines1 == [1, 21, 42, 62, 83]
        assert (truth[(0, 0)].y_top, truth[(0, 0)].y_bot) == (0, 60)
        assert (truth[(0, 1)].y_top, truth[(0, 1)].y_bot) == (60, 120)

    def test_mask_is_union_of_planted(self, clean_field):
        expected = np.zeros_like(clean_field.mask)
        for _, _, x0, y0, x1, y1 in clean_field.planted:
            expected[y0:y1, x0:x1] = 1
        assert np.array_equal(clean_field.mask, expected)
        assert (0, 0, 5, 6, 20, 55) in clean_field.planted

    def test_planted_inside_truth(self, clean_field):
        truth = clean_field.truth.by_key()
        for m, z, x0, y0, x1, y1 in clean_field.planted:
            plot = truth[(m, z)]
            assert plot.x_left <= x0 and x1 <= plot.x_right
            assert plot.y_top <= y0 and y1 <= plot.y_bot

    def test_set_line_is_midpoint(self):
        field = FieldGenerator(small_field_config(crop_set_offsets=[[0, -3], [0, 3]])).build()
        truth = field.truth.by_key()
        # set 0 ends at 41; set 1 starts at 38 and 44
        assert truth[(2, 0)].x_left == 40
        assert truth[(2, 1)].x_left == 43


class TestRandomFields:
    """Seeded draws"""

    def test_same_seed_same_field(self, synthetic_config):
        a = FieldGenerator(synthetic_config).build()
        b = FieldGenerator(synthetic_config).build()
        assert np.array_equal(a.mask, b.mask)
        assert a.truth == b.truth
        assert a.offsets == b.offsets

    def test_seed_changes_field(self, synthetic_config):
        a, _ = generate(synthetic_config)
        b, _ = generate(synthetic_config.model_copy(update={"seed": 12}))
        assert not np.array_equal(a, b)

    def test_default_offsets_bounded(self, synthetic_config):
        field = FieldGenerator(synthetic_config).build()
        bound = synthetic_config.spec.d_gap // 6
        assert len(field.offsets) == 3 and all(len(o) == 2 for o in field.offsets)
        assert all(abs(dx) <= bound for row in field.offsets for dx in row)
        assert all(row[0] >= 0 for row in field.offsets)

    def test_densities(self):
        cfg = SynthConfig(m_rows=4, n_ranges=1, plant_density=0.0, noise_density=0.1, seed=5)
        mask, _ = generate(cfg)
        assert abs(mask.mean() - 0.1) < 0.01

        cfg = small_field_config(plant_density=0.5, seed=5)
        field = FieldGenerator(cfg).build()
        filled = [field.mask[y0:y1, x0:x1].mean() for _, _, x0, y0, x1, y1 in field.planted]
        assert abs(np.mean(filled) - 0.5) < 0.05

    def test_all_plots_empty(self):
        field = FieldGenerator(small_field_config(empty_plot_fraction=1.0)).build()
        assert field.mask.sum() == 0
        assert field.planted == []
        assert len(field.truth.plots) == 8
        assert len(field.empty) == 8 and field.non_empty == []

    def test_germination_delay(self):
        field = FieldGenerator(small_field_config(germination_jitter=5)).build()
        truth = field.truth.by_key()
        for m, z, _, y0, _, _ in field.planted:
            j = int(field.jitter[z, m])
            assert y0 == 6 + 60 * z + j
            assert truth[(m, z)].y_top == (60 * z + j // 2 if z > 0 else 0)
            if z > 0:
                assert truth[(m, z - 1)].y_bot == truth[(m, z)].y_top

    def test_outer_lines_at_raster_edges(self):
        field = FieldGenerator(small_field_config(germination_jitter=5)).build()
        height = field.mask.shape[0]
        for plot in field.truth.plots:
            if plot.range == 0:
                assert plot.y_top == 0
            if plot.range == 1:
                assert plot.y_bot == height - 1


class TestGeometryErrors:
    """Rejected field descriptions"""

    def test_even_range_gap(self):
        with pytest.raises(SynthGeometryError):
            FieldGenerator(small_field_config(range_gap=10)).build()

    def test_plants_left_of_raster(self):
        with pytest.raises(SynthGeometryError):
            FieldGenerator(small_field_config(crop_set_offsets=[[-1, 0], [0, 0]])).build()

    def test_offset_beyond_gap(self):
        with pytest.raises(ValidationError):
            small_field_config(crop_set_offsets=[[6, 0], [0, 0]])

    def test_partial_crop_set(self):
        with pytest.raises(ValidationError):
            small_field_config(m_rows=3)

    def test_offset_shape(self):
        with pytest.raises(ValidationError):
            small_field_config(crop_set_offsets=[[0, 0]])


class TestExtractConfig:
    """Run file emitted next to a generated field"""

    def test_round_trips_as_run_config(self):
        cfg = small_field_config()
        text = extract_config_toml(cfg, "out/mask.png", "out/extracted")
        config = RunConfig.model_validate(tomllib.loads(text))
        assert config.input.kind == "mask"
        assert config.planter == cfg.spec
        assert (config.field.m_rows, config.field.n_ranges) == (4, 2)
        assert config.output.overlay

import numpy as np
import pytest

from app.schemas.planter import PlanterSpec
from app.schemas.run import SynthConfig
from app.services.synth.generator import FieldGenerator


def small_spec(**overrides) -> PlanterSpec:
    """Two-row crop sets, d_crop = C * d_row + 1, odd gap"""
    values = dict(c_rows=2, d_crop=41, d_row=20, d_gap=5, d_ran_gap=10)
    values.update(overrides)
    return PlanterSpec(**values)


def small_field_config(**overrides) -> SynthConfig:
    values = dict(
        spec=small_spec(),
        m_rows=4,
        n_ranges=2,
        crop_set_offsets=[[2, -1], [1, 0]],
        range_pitch=60,
        range_gap=11,
        plant_density=1.0,
        noise_density=0.0,
        seed=7,
    )
    values.update(overrides)
    return SynthConfig(**values)


@pytest.fixture
def spec():
    return small_spec()


@pytest.fixture
def clean_field():
    """Fully planted, noise-free 4 x 2 field with known offsets"""
    return FieldGenerator(small_field_config()).build()


@pytest.fixture
def synthetic_config():
    """Default-geometry field shrunk to 8 rows x 3 ranges"""
    return SynthConfig(m_rows=8, n_ranges=3, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_run_file(tmp_path):
    """Writes a TOML run file into tmp_path and returns its path"""

    def _write(body: str, name: str = "run.toml"):
        path = tmp_path / name
        path.write_text(body)
        return path

    return _write

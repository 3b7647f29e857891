"""
Run-file loading.

A run file is TOML with one table per concern::

    [input]
    path = "field.png"
    kind = "rgb"            # or "mask"
    roi = { x0 = 0, y0 = 0, width = 4000, height = 3000 }

    [segmentation]
    method = "hue"          # or "otsu"
    hue_lo = 20             # hue on the 8-bit [0, 179] scale (degrees / 2)
    hue_hi = 90

    [planter]
    c_rows = 4
    d_crop = 761
    d_row = 190
    d_gap = 31
    d_ran_gap = 100

    [field]
    m_rows = 20
    n_ranges = 5

    [weights]
    w0 = 1.0
    w1 = 1.0
    w2 = 1.0

    [range_search]          # all optional
    y0_max = 500
    dy_min = 250.0
    dy_max = 900.0

    [output]
    directory = "out"
    overlay = true
    chips = false
    dump_profiles = false

    [runtime]
    workers = 4

Relative paths are resolved against the run file's directory.
"""
import logging
import os
import tomllib
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from app.exceptions import ConfigValidationError
from app.schemas.run import RunConfig

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def read_toml(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError(f"config file not found: {path}", field="config")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigValidationError(f"config file {path} is not valid TOML: {e}", field="config") from e


def parse_override(assignment: str) -> tuple:
    """Split ``section.key=value``; the value is read as a TOML literal when possible"""
    if "=" not in assignment:
        raise ConfigValidationError(f"override '{assignment}' is not of the form key=value", field=assignment)
    key, raw = assignment.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigValidationError(f"override '{assignment}' has an empty key", field=assignment)
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key, value


def apply_overrides(data: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Set dotted keys (``planter.d_gap``) on a nested mapping, returning a new dict"""
    merged = _deep_copy(data)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        parts = dotted.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = value
    return merged


def validate_model(model: Type[ModelT], data: Mapping[str, Any]) -> ModelT:
    """Validate with pydantic, re-raising the first problem as a named-field error"""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"]) or model.__name__
        if first["type"] == "missing":
            message = f"missing required config field '{field}'"
        else:
            message = f"invalid config field '{field}': {first['msg']}"
        raise ConfigValidationError(message, field=field) from e


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    assignments: Iterable[str] = (),
) -> RunConfig:
    data: Dict[str, Any] = {}
    base_dir = Path.cwd()
    if path is not None:
        data = read_toml(Path(path))
        base_dir = Path(path).resolve().parent

    flag_values = dict(parse_override(a) for a in assignments)
    flag_values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    config = validate_model(RunConfig, apply_overrides(data, flag_values))

    # paths given on the command line stay relative to the working directory
    if "input.path" not in flag_values and not config.input.path.is_absolute():
        config.input.path = base_dir / config.input.path
    if "output.directory" not in flag_values and not config.output.directory.is_absolute():
        config.output.directory = base_dir / config.output.directory
    check_paths(config)

    logger.debug(f"Loaded run config from {path}: {config.model_dump(mode='json')}")
    return config


def check_paths(config: RunConfig) -> RunConfig:
    """Input raster readable, output directory existing or creatable"""
    source = config.input.path
    if not source.is_file() or not os.access(source, os.R_OK):
        raise ConfigValidationError(f"input raster '{source}' is missing or unreadable", field="input.path")

    target = config.output.directory.absolute()
    existing = next((p for p in (target, *target.parents) if p.exists()), None)
    if existing is None or not existing.is_dir() or not os.access(existing, os.W_OK | os.X_OK):
        raise ConfigValidationError(
            f"output directory '{config.output.directory}' cannot be created", field="output.directory"
        )
    return config


def _deep_copy(data: Mapping[str, Any]) -> Dict[str, Any]:
    return {k: _deep_copy(v) if isinstance(v, Mapping) else v for k, v in data.items()}

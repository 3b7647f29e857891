# Synthetic field exports
from app.services.synth.generator import (
    FieldGenerator,
    SyntheticField,
    generate,
    extract_config_toml,
)

__all__ = ["FieldGenerator", "SyntheticField", "generate", "extract_config_toml"]

from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    # Logging
    log_level: str = "INFO"
    log_format: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # Parallelism (None = all available cores)
    workers: Optional[int] = None

    # Segmentation (hue on the 8-bit [0, 179] scale)
    hue_lo: int = 20
    hue_hi: int = 90

    # Range boundary correction bound, pixels
    d_ran_gap: int = 100

    # Crop-set offset objective weights
    omega_0: float = 1.0
    omega_1: float = 1.0
    omega_2: float = 1.0

    # Float objectives closer than this to the minimum count as ties
    tie_tolerance: float = 1e-9

    # Fine-tuning keeps a line whose neighbour band averages below this normalized level
    empty_side_level: float = 0.1

    # Synthetic field generation
    synth_seed: int = 20210601

    class Config:
        env_file = ".env"
        env_prefix = "COPE_"
        case_sensitive = False


settings = Settings()

# Profile services exports
from app.services.profiles.energy import (
    Axis,
    EnergyProfile,
    NormalizedProfile,
    range_energy,
    global_row_energy,
    local_row_energy,
    normalize,
)

__all__ = [
    "Axis",
    "EnergyProfile",
    "NormalizedProfile",
    "range_energy",
    "global_row_energy",
    "local_row_energy",
    "normalize",
]

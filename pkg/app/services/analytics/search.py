"""Exhaustive 1-D scans with a deterministic tie-break."""
import math

import numpy as np


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def argmin_nearest(deltas: np.ndarray, objective: np.ndarray, tolerance: float = 0.0) -> int:
    """
    Position (into ``deltas``) of the minimum of ``objective``.
    Values within ``tolerance`` of the minimum tie; ties go to the smallest
    |delta|, then to the negative delta.
    """
    deltas = np.asarray(deltas)
    objective = np.asarray(objective)
    best = objective.min()
    tied = np.flatnonzero(objective <= best + tolerance)
    order = np.lexsort((deltas[tied], np.abs(deltas[tied])))
    return int(tied[order[0]])

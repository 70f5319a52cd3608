"""Input validation helpers shared by the numerical modules."""
from __future__ import annotations

import math
from collections.abc import Mapping

import numpy as np

from .errors import DimensionMismatch, InvalidS, NegativeTime


def check_s(s) -> float:
    s = float(s)
    if not (0.0 < s < 1.0):
        raise InvalidS(f"fractional exponent must lie in (0, 1), got {s}")
    return s


def check_time(t) -> float:
    t = float(t)
    if not t >= 0.0:
        raise NegativeTime(f"time must be nonnegative, got {t}")
    return t


def as_function(u, graph, name="u") -> np.ndarray:
    """Coerce ``u`` to a float vector aligned with the graph's vertex index.

    Accepts a sequence/array of length n or a mapping vertex id -> value.
    """
    n = graph.n
    if isinstance(u, Mapping):
        missing = [v for v in graph.vertices if v not in u]
        if missing:
            raise DimensionMismatch(f"{name} has no value for vertices {missing[:5]}")
        return np.array([float(u[v]) for v in graph.vertices])
    arr = np.array(u, dtype=float)
    if arr.ndim == 0:
        raise DimensionMismatch(f"{name} must be a function on the vertices, got a scalar")
    if arr.shape[0] != n or arr.ndim > 2:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
    return arr


def check_length(u, n, name="u") -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
    return arr


def is_finite_positive(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0

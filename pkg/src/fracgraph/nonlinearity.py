"""Nonlinearities f(x, y) with primitive F and numeric hypothesis checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParam, UnknownName

__all__ = ["Nonlinearity", "builtin_nonlinearity", "check_hypotheses", "BUILTIN_NAMES"]

BUILTIN_NAMES = ("paper_example", "cubic", "power_p")


@dataclass(frozen=True)
class Nonlinearity:
    """f and its primitive F(x, y) = int_0^y f(x, t) dt.

    ``f``, ``F`` and the optional derivative ``df`` are called as
    ``f(x, y)`` with ``x`` an array of vertex indices and ``y`` an array of
    values of the same shape.
    """

    name: str
    f: Callable
    F: Callable
    alpha: float
    df: Callable | None = None
    params: tuple = ()

    def derivative(self, x, y):
        if self.df is not None:
            return self.df(x, y)
        eps = 1e-6 * np.maximum(1.0, np.abs(y))
        return (self.f(x, y + eps) - self.f(x, y - eps)) / (2 * eps)

    def describe(self):
        return {"name": self.name, "alpha": self.alpha, **dict(self.params)}


def _expm1_minus(z):
    """exp(z) - 1 - z without cancellation for small z >= 0."""
    z = np.asarray(z, dtype=float)
    small = z < 1e-3
    series = z**2 * (0.5 + z * (1 / 6 + z * (1 / 24 + z / 120)))
    with np.errstate(over="ignore"):
        big = np.expm1(z) - z
    return np.where(small, series, big)


def _exp_f(x, y):
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        pos = y * np.expm1(y**2)
        neg = y**3 * np.expm1(y**4)
    return np.where(y >= 0, pos, neg)


def _exp_F(x, y):
    y = np.asarray(y, dtype=float)
    return np.where(y >= 0, _expm1_minus(y**2) / 2, _expm1_minus(y**4) / 4)


def _exp_df(x, y):
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        pos = np.expm1(y**2) + 2 * y**2 * np.exp(y**2)
        neg = 3 * y**2 * np.expm1(y**4) + 4 * y**6 * np.exp(y**4)
    return np.where(y >= 0, pos, neg)


def _power(p):
    def f(x, y):
        y = np.asarray(y, dtype=float)
        return np.abs(y) ** (p - 1) * y

    def F(x, y):
        return np.abs(np.asarray(y, dtype=float)) ** (p + 1) / (p + 1)

    def df(x, y):
        return p * np.abs(np.asarray(y, dtype=float)) ** (p - 1)

    return f, F, df


def builtin_nonlinearity(name: str, p: float | None = None) -> Nonlinearity:
    """``paper_example``: y(e^{y^2}-1) for y >= 0 and y^3(e^{y^4}-1) for y < 0.
    ``cubic``: y^3.  ``power_p``: |y|^{p-1} y with p > 1.
    """
    if name == "paper_example":
        # alpha is never used by the solvers; 2.5 passes the grid check on |y| >= 0.05
        return Nonlinearity(name, _exp_f, _exp_F, 2.5, _exp_df)
    if name == "cubic":
        f, F, df = _power(3.0)
        return Nonlinearity(name, f, F, 4.0, df, params=(("p", 3.0),))
    if name == "power_p":
        if p is None or not np.isfinite(p) or p <= 1:
            raise InvalidParam(f"power_p needs p > 1, got {p}")
        f, F, df = _power(float(p))
        return Nonlinearity(name, f, F, float(p) + 1.0, df, params=(("p", float(p)),))
    raise UnknownName(f"unknown nonlinearity {name!r}; expected one of {BUILTIN_NAMES}")


def _strictly_increasing(v):
    return bool(np.all(np.diff(v) > 0))


def check_hypotheses(nl: Nonlinearity, lambda1: float, M: float = 2.0, grid_n: int = 200,
                     branch: str | None = None, x=0) -> dict:
    """Grid-based verdicts for (F1)-(F5).

    Grids can only falsify the asymptotic conditions, never prove them.
    ``branch`` restricts the checks to y > 0 ("positive") or y < 0
    ("negative"); by default both half-lines are examined.
    """
    if not M > 0:
        raise InvalidParam("M must be positive")
    if grid_n < 100:
        raise InvalidParam("grid_n must be at least 100")
    halves = {"positive": [1.0], "negative": [-1.0], None: [1.0, -1.0]}[branch]
    mag = np.linspace(M / grid_n, M, grid_n)
    small = np.linspace(1e-3 / grid_n, 1e-3, grid_n)
    with np.errstate(over="ignore", invalid="ignore"):
        f0 = float(np.asarray(nl.f(x, np.array([0.0])))[0])
        C_M, f3, f4_sup, f5 = 0.0, True, -np.inf, True
        for sign in halves:
            y = sign * mag
            fy, Fy = nl.f(x, y), nl.F(x, y)
            C_M = max(C_M, float(np.max(np.abs(fy))))
            lhs = nl.alpha * Fy
            f3 = f3 and bool(np.all(lhs > 0) and np.all(lhs <= y * fy * (1 + 1e-12)))
            ys = sign * small
            f4_sup = max(f4_sup, float(np.max(nl.f(x, ys) / ys)))
            ratio = fy / mag
            f5 = f5 and _strictly_increasing(ratio if sign > 0 else ratio[::-1])
    rep = {
        "F1": abs(f0) == 0.0,
        "F2": bool(np.isfinite(C_M)),
        "C_M": C_M,
        "F3": f3,
        "alpha": nl.alpha,
        "F4": bool(f4_sup < lambda1),
        "F4_sup": f4_sup,
        "lambda1": float(lambda1),
        "F5": f5,
        "M": float(M),
        "grid_n": int(grid_n),
    }
    rep["ok"] = all(rep[k] for k in ("F1", "F2", "F3", "F4", "F5"))
    return rep

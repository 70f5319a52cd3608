"""scikit-learn style wrappers.

``fit`` takes a :class:`WeightedGraph`; ``transform`` takes an array of
functions laid out as (n_functions, n_vertices), the usual sample-by-feature
shape.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .calculus import PotentialH
from .errors import DimensionMismatch, InvalidParam
from .graph import WeightedGraph
from .kernel import QuadratureConfig, frac_laplacian_apply, ws_quadrature, ws_spectral
from .nonlinearity import Nonlinearity, builtin_nonlinearity
from .schrodinger import SolverConfig, ground_state_solve, mountain_pass_solve
from .spectral import eigendecompose, semigroup_apply

__all__ = ["FractionalLaplacian", "HeatSemigroup", "SignedGroundState"]


def _check_graph(g):
    if not isinstance(g, WeightedGraph):
        raise TypeError(f"fit expects a WeightedGraph, got {type(g).__name__}")
    return g


def _functions(X, n):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise DimensionMismatch(f"expected shape (m, {n}), got {X.shape}")
    return X


class FractionalLaplacian(TransformerMixin, BaseEstimator):
    """Applies (-Delta)^s to functions on a fitted graph."""

    def __init__(self, s=0.5, method="spectral", quadrature=None):
        self.s = s
        self.method = method
        self.quadrature = quadrature

    def fit(self, X, y=None):
        g = _check_graph(X)
        self.spectrum_ = eigendecompose(g)
        if self.method == "spectral":
            self.kernel_ = ws_spectral(self.spectrum_, self.s)
        elif self.method == "quadrature":
            self.kernel_ = ws_quadrature(self.spectrum_, self.s, self.quadrature or QuadratureConfig())
        else:
            raise InvalidParam(f"method must be 'spectral' or 'quadrature', got {self.method!r}")
        self.n_vertices_ = g.n
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        X = _functions(X, self.n_vertices_)
        return frac_laplacian_apply(self.kernel_, X.T).T


class HeatSemigroup(TransformerMixin, BaseEstimator):
    """Applies e^{t Delta}."""

    def __init__(self, t=1.0):
        self.t = t

    def fit(self, X, y=None):
        self.spectrum_ = eigendecompose(_check_graph(X))
        return self

    def transform(self, X):
        check_is_fitted(self, "spectrum_")
        X = _functions(X, self.spectrum_.n)
        return np.stack([semigroup_apply(self.spectrum_, self.t, row) for row in X])


class SignedGroundState(BaseEstimator):
    """Solves (-Delta)^s u + h u = f(x, u^+/-) on the fitted graph.

    ``potential`` is a positive constant or a per-vertex array;
    ``nonlinearity`` a builtin name or a :class:`Nonlinearity`.
    """

    def __init__(self, s=0.5, potential=1.0, nonlinearity="cubic", branch="positive",
                 solver="nehari", tol_residual=1e-9, max_iters=10000, step=0.1, seed=0):
        self.s = s
        self.potential = potential
        self.nonlinearity = nonlinearity
        self.branch = branch
        self.solver = solver
        self.tol_residual = tol_residual
        self.max_iters = max_iters
        self.step = step
        self.seed = seed

    def fit(self, X, y=None):
        g = _check_graph(X)
        k = ws_spectral(eigendecompose(g), self.s)
        if np.ndim(self.potential) == 0:
            h = PotentialH.constant(g, self.potential)
        else:
            h = PotentialH.from_values(g, self.potential)
        nl = self.nonlinearity
        if not isinstance(nl, Nonlinearity):
            nl = builtin_nonlinearity(nl)
        cfg = SolverConfig(tol_residual=self.tol_residual, max_iters=self.max_iters,
                           step=self.step, seed=self.seed)
        if self.solver == "nehari":
            sol = ground_state_solve(k, h, nl, self.branch, cfg)
        elif self.solver == "mountain_pass":
            sol = mountain_pass_solve(k, h, nl, self.branch, cfg)
        else:
            raise InvalidParam(f"solver must be 'nehari' or 'mountain_pass', got {self.solver!r}")
        self.solution_ = sol
        self.u_ = sol.u
        self.energy_ = sol.energy
        return self

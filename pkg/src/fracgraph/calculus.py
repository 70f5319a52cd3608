"""Fractional gradient, divergence, Sobolev-type norms and the linear threshold lambda_1.

The fractional gradient of u at x is the finite sequence

    grad_s u(x)_y = sqrt(W_s(x, y) / (2 mu(x))) * (u(x) - u(y)),   y != x,

so that |grad_s u|^2(x) = 1/(2 mu(x)) sum_y W_s(x, y) (u(x) - u(y))^2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._validation import as_function
from .errors import EigenFailure, LayoutMismatch, NonPositivePotential
from .graph import WeightedGraph, distances_from
from .kernel import FracKernel, frac_laplacian_apply

__all__ = [
    "VectorField",
    "PotentialH",
    "frac_gradient",
    "frac_dot",
    "divergence_s",
    "ibp_residual",
    "lp_norm",
    "sobolev_norm_s2",
    "hs_norm",
    "hs_form_matrix",
    "lambda1",
    "lambda1_pair",
    "embedding_check",
    "norm_report",
    "write_norm_report",
]


def _offdiag_mask(n):
    return ~np.eye(n, dtype=bool)


@dataclass(frozen=True, eq=False)
class VectorField:
    """A field on V with one component per ordered pair (x, y), y != x.

    ``components[x]`` lists the entries for y in vertex-index order with the
    slot y == x dropped, so the array has shape (n, n - 1).
    """

    components: np.ndarray
    s: float
    n: int
    sq: np.ndarray | None = None

    def full(self) -> np.ndarray:
        """Components as an (n, n) array with a zero diagonal."""
        out = np.zeros((self.n, self.n))
        out[_offdiag_mask(self.n)] = self.components.ravel()
        return out

    @property
    def sq_length(self) -> np.ndarray:
        if self.sq is not None:
            return self.sq
        return (self.components**2).sum(axis=1)

    @classmethod
    def from_full(cls, F, s, sq=None):
        F = np.asarray(F, dtype=float)
        n = F.shape[0]
        if F.shape != (n, n):
            raise LayoutMismatch(f"expected a square component array, got {F.shape}")
        return cls(F[_offdiag_mask(n)].reshape(n, n - 1), float(s), n, sq)


@dataclass(frozen=True, eq=False)
class PotentialH:
    """Strictly positive potential h on the vertices."""

    values: np.ndarray
    graph: WeightedGraph

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.graph.n,):
            raise LayoutMismatch(f"potential has shape {v.shape}, expected ({self.graph.n},)")
        if not np.all(np.isfinite(v)) or v.min() <= 0:
            raise NonPositivePotential(f"potential must be positive everywhere, min is {v.min()}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def h0(self) -> float:
        return float(self.values.min())

    @classmethod
    def constant(cls, g: WeightedGraph, c: float) -> "PotentialH":
        return cls(np.full(g.n, float(c)), g)

    @classmethod
    def from_values(cls, g: WeightedGraph, values) -> "PotentialH":
        return cls(as_function(values, g, "h"), g)

    @classmethod
    def ramp(cls, g: WeightedGraph, a: float, b: float, x0=None) -> "PotentialH":
        """h(x) = a + b * d(x, x0); coercive on infinite graphs when b > 0."""
        x0 = g.vertices[0] if x0 is None else x0
        d = distances_from(g, x0).astype(float)
        return cls(a + b * d, g)

    def to_dict(self):
        return {str(v): float(h) for v, h in zip(self.graph.vertices, self.values)}


def _weights(k: FracKernel) -> np.ndarray:
    # G[x, y] = sqrt(W(x, y) / (2 mu(x)))
    return np.sqrt(k.W / (2.0 * k.measure[:, None]))


def frac_gradient(k: FracKernel, u) -> VectorField:
    u = as_function(u, k.graph)
    if u.ndim != 1:
        raise LayoutMismatch("frac_gradient takes a single function")
    du = u[:, None] - u[None, :]
    # squared length from the same expression as frac_dot(u, u), so the two agree bitwise
    return VectorField.from_full(_weights(k) * du, k.s, _pointwise(k, du, du))


def _pointwise(k, du, dv):
    return (k.W * (du * dv)).sum(axis=1) / (2.0 * k.measure)


def frac_dot(k: FracKernel, u, v) -> np.ndarray:
    """Pointwise 1/(2 mu(x)) sum_y W(x, y) (u(x) - u(y)) (v(x) - v(y))."""
    u = as_function(u, k.graph)
    v = as_function(v, k.graph, "v")
    return _pointwise(k, u[:, None] - u[None, :], v[:, None] - v[None, :])


def divergence_s(k: FracKernel, F: VectorField) -> np.ndarray:
    """Adjoint of -grad_s:  int div_s F * phi dmu = -int F . grad_s phi dmu."""
    if not isinstance(F, VectorField) or F.n != k.n or F.components.shape != (k.n, k.n - 1):
        raise LayoutMismatch("vector field layout does not match the kernel")
    if F.s != k.s:
        raise LayoutMismatch(f"vector field built for s={F.s}, kernel has s={k.s}")
    G = _weights(k)
    Ff = F.full()
    mu = k.measure
    own = mu * (G * Ff).sum(axis=1)
    incoming = (mu[:, None] * G * Ff).sum(axis=0)
    return -(own - incoming) / mu


def ibp_residual(k: FracKernel, u, phi) -> float:
    """|int phi (-Delta)^s u dmu - int grad_s phi . grad_s u dmu|."""
    u = as_function(u, k.graph)
    phi = as_function(phi, k.graph, "phi")
    mu = k.measure
    left = float(np.sum(phi * frac_laplacian_apply(k, u) * mu))
    right = float(np.sum(frac_dot(k, phi, u) * mu))
    return abs(left - right)


def lp_norm(u, mu, q) -> float:
    u = np.asarray(u, dtype=float)
    if np.isinf(q):
        return float(np.abs(u).max())
    return float(np.sum(np.abs(u) ** q * mu) ** (1.0 / q))


def _energy_norm(k, u, weight):
    # rescale first so that tiny or huge u neither underflows nor overflows
    scale = float(np.abs(u).max())
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    v = u / scale
    return scale * float(np.sqrt(np.sum((frac_dot(k, v, v) + weight * v**2) * k.measure)))


def sobolev_norm_s2(k: FracKernel, u) -> float:
    return _energy_norm(k, as_function(u, k.graph), 1.0)


def hs_norm(k: FracKernel, h: PotentialH, u) -> float:
    if not isinstance(h, PotentialH):
        h = PotentialH.from_values(k.graph, h)
    return _energy_norm(k, as_function(u, k.graph), h.values)


def hs_form_matrix(k: FracKernel, h: PotentialH) -> np.ndarray:
    """A with u^T A u = ||u||_{H_s}^2."""
    return k.stiffness() + np.diag(h.values * k.measure)


def lambda1_pair(k: FracKernel, h: PotentialH):
    """Smallest eigenpair of A u = lambda M u, M = diag(mu).

    The eigenvector is normalised in L^2(mu) with its first significant
    entry positive.
    """
    if not isinstance(h, PotentialH):
        h = PotentialH.from_values(k.graph, h)
    r = 1.0 / np.sqrt(k.measure)
    B = hs_form_matrix(k, h) * r[:, None] * r[None, :]
    try:
        lam, U = np.linalg.eigh(0.5 * (B + B.T))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.isfinite(lam[0]):
        raise EigenFailure("non-finite eigenvalue")
    v = U[:, 0] * r
    big = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    if v[big[0]] < 0:
        v = -v
    return float(lam[0]), v


def lambda1(k: FracKernel, h: PotentialH) -> float:
    return lambda1_pair(k, h)[0]


def embedding_check(k: FracKernel, u, qs=(3, 4, 6)) -> dict:
    """Compare ||u||_inf and ||u||_q against mu_0-weighted multiples of ||u||_{s,2}.

    Returns slacks (bound minus value); all should be nonnegative.
    """
    u = as_function(u, k.graph)
    mu = k.measure
    mu0 = float(mu.min())
    s2 = sobolev_norm_s2(k, u)
    out = {"inf": s2**2 / mu0 - float(np.abs(u).max()) ** 2}
    for q in qs:
        out[str(q)] = mu0 ** ((2.0 - q) / (2.0 * q)) * s2 - lp_norm(u, mu, q)
    return out


def norm_report(k: FracKernel, h: PotentialH, functions: dict | None = None) -> dict:
    """JSON-ready summary.  ``functions`` maps a label to a vertex function;
    by default the lambda_1 minimizer is reported."""
    lam, v = lambda1_pair(k, h)
    if functions is None:
        functions = {"lambda1_minimizer": v}
    norms = {}
    for name, u in functions.items():
        u = as_function(u, k.graph)
        norms[name] = {
            "l2": lp_norm(u, k.measure, 2),
            "linf": lp_norm(u, k.measure, np.inf),
            "sobolev_s2": sobolev_norm_s2(k, u),
            "hs": hs_norm(k, h, u),
        }
    return {"s": k.s, "lambda1": lam, "h0": h.h0, "norms": norms}


def write_norm_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

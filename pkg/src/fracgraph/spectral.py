"""Graph Laplacian, mu-orthonormal eigenpairs and the heat semigroup.

The Laplacian is Delta u(x) = (1/mu(x)) sum_{y~x} w_xy (u(y) - u(x)).  All
routines work with L = -Delta, which is self-adjoint for <u, v> = sum u v mu.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import as_function, check_time
from .errors import EigenFailure, TooLarge
from .graph import WeightedGraph

__all__ = [
    "Spectrum",
    "HeatMatrix",
    "mu_laplacian",
    "symmetric_laplacian",
    "eigendecompose",
    "heat_kernel",
    "semigroup_apply",
    "mass_check",
    "export_spectrum_csv",
    "DEFAULT_MAX_VERTICES",
]

DEFAULT_MAX_VERTICES = 5000
NEGATIVE_ENTRY_TOL = 1e-12


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def mu_laplacian(g: WeightedGraph) -> np.ndarray:
    """Matrix L with ``L @ u == -Delta u``.

    Not symmetric unless mu is constant; ``M L`` is.
    """
    g.require_connected()
    A = g.adjacency()
    return (np.diag(A.sum(axis=1)) - A) / g.measure[:, None]


def symmetric_laplacian(g: WeightedGraph) -> np.ndarray:
    """M^{1/2} L M^{-1/2}, symmetric by construction."""
    g.require_connected()
    A = g.adjacency()
    r = 1.0 / np.sqrt(g.measure)
    S = (np.diag(A.sum(axis=1)) - A) * r[:, None] * r[None, :]
    return 0.5 * (S + S.T)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs of -Delta.

    ``eigenvectors[:, k]`` is phi_k, normalised so that
    ``sum_x phi_j(x) phi_k(x) mu(x) = delta_jk``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    graph: WeightedGraph

    @property
    def n(self):
        return len(self.eigenvalues)

    @property
    def measure(self):
        return self.graph.measure

    def orthonormal_vectors(self) -> np.ndarray:
        """Euclidean-orthonormal eigenvectors M^{1/2} phi_k of the symmetrized Laplacian."""
        return np.sqrt(self.measure)[:, None] * self.eigenvectors

    def reconstruct(self) -> np.ndarray:
        """sum_k lambda_k phi_k (phi_k mu)^T, which should equal ``mu_laplacian``."""
        P = self.eigenvectors
        return (P * self.eigenvalues) @ (P * self.measure[:, None]).T

    def power(self, s: float) -> np.ndarray:
        """Spectral power L^s as a matrix acting on vertex functions."""
        P = self.eigenvectors
        return (P * self.eigenvalues**s) @ (P * self.measure[:, None]).T

    def apply_power(self, u, s: float) -> np.ndarray:
        """sum_k lambda_k^s <u, phi_k>_mu phi_k."""
        u = np.asarray(u, dtype=float)
        P = self.eigenvectors
        coef = P.T @ (self.measure[:, None] * u if u.ndim == 2 else self.measure * u)
        lam = self.eigenvalues**s
        return P @ (lam[:, None] * coef if u.ndim == 2 else lam * coef)


def eigendecompose(g: WeightedGraph, max_vertices: int = DEFAULT_MAX_VERTICES) -> Spectrum:
    """Dense eigendecomposition of -Delta on a connected graph.

    Eigenvalues are ascending; lambda_0 is pinned to exactly 0 and phi_0 to the
    constant 1/sqrt(sum mu).  The first entry of each phi_k with magnitude
    above 1e-12 of its max is made positive.
    """
    g.require_connected()
    if g.n > max_vertices:
        raise TooLarge(f"{g.n} vertices exceeds the dense eigensolver cap {max_vertices}")
    S = symmetric_laplacian(g)
    try:
        lam, U = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigenFailure("non-finite eigenvalues")

    scale = max(1.0, float(np.abs(lam).max()))
    if abs(lam[0]) > 1e-9 * scale or (g.n > 1 and lam[1] <= 1e-9 * scale):
        raise EigenFailure(f"kernel of the Laplacian is not one-dimensional: {lam[:2]}")
    lam = np.clip(lam, 0.0, None)
    lam[0] = 0.0

    sqrt_mu = np.sqrt(g.measure)
    U[:, 0] = sqrt_mu / np.sqrt(g.measure.sum())
    for k in range(1, g.n):
        col = U[:, k]
        big = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        if col[big[0]] < 0:
            U[:, k] = -col
    phi = U / sqrt_mu[:, None]
    return Spectrum(_readonly(lam), _readonly(phi), g)


@dataclass(frozen=True, eq=False)
class HeatMatrix:
    """Heat kernel p(t, x, y) at a fixed time."""

    t: float
    entries: np.ndarray

    def row_mass(self, measure) -> np.ndarray:
        """sum_y p(t, x, y) mu(y) for every x."""
        return self.entries @ measure


def _raw_heat(sp: Spectrum, t: float) -> np.ndarray:
    P = sp.eigenvectors
    H = (P * np.exp(-sp.eigenvalues * t)) @ P.T
    return 0.5 * (H + H.T)


def heat_kernel(sp: Spectrum, t: float, clamp: bool = True) -> HeatMatrix:
    """p(t, x, y) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y).

    At ``t == 0`` the exact value delta_xy / mu(x) is returned.  Entries in
    [-1e-12, 0) are round-off and are clamped to zero; anything more negative
    triggers a ``RuntimeWarning``.
    """
    t = check_time(t)
    if t == 0.0:
        return HeatMatrix(0.0, _readonly(np.diag(1.0 / sp.measure)))
    H = _raw_heat(sp, t)
    if clamp:
        worst = H.min()
        if worst < -NEGATIVE_ENTRY_TOL:
            warnings.warn(
                f"heat kernel entry {worst:.3e} at t={t} is below -{NEGATIVE_ENTRY_TOL}",
                RuntimeWarning,
                stacklevel=2,
            )
        else:
            H[H < 0] = 0.0
    return HeatMatrix(t, _readonly(H))


def semigroup_apply(sp: Spectrum, t: float, u) -> np.ndarray:
    """e^{t Delta} u, computed in the eigenbasis."""
    t = check_time(t)
    u = as_function(u, sp.graph)
    if t == 0.0:
        return u.copy()
    P = sp.eigenvectors
    coef = P.T @ (sp.measure * u)
    return P @ (np.exp(-sp.eigenvalues * t) * coef)


def mass_check(sp: Spectrum, times) -> float:
    """max over x and t of |sum_y p(t, x, y) mu(y) - 1|."""
    worst = 0.0
    for t in np.atleast_1d(np.asarray(times, dtype=float)):
        H = heat_kernel(sp, t, clamp=False)
        worst = max(worst, float(np.abs(H.row_mass(sp.measure) - 1.0).max()))
    return worst


def export_spectrum_csv(sp: Spectrum, path) -> None:
    """Rows ``k, lambda_k, phi_k(v_0), ..., phi_k(v_{n-1})``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["k", "lambda"] + [f"phi({v})" for v in sp.graph.vertices])
        for k in range(sp.n):
            vals = [repr(float(x)) for x in sp.eigenvectors[:, k]]
            out.writerow([k, repr(float(sp.eigenvalues[k]))] + vals)

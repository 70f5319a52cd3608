"""The fractional kernel W_s and the operator (-Delta)^s.

For x != y the kernel is

    W_s(x, y) = s / Gamma(1 - s) * mu(x) mu(y) * int_0^inf p(t, x, y) t^(-1-s) dt

and the operator acts by

    (-Delta)^s u(x) = 1/mu(x) * sum_{y != x} W_s(x, y) (u(x) - u(y)).

Two constructions are provided.  ``ws_spectral`` is exact on finite graphs
(the off-diagonal of -M L^s).  ``ws_quadrature`` evaluates the time integral
numerically and serves as an independent check.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._validation import check_length, check_s
from .errors import InvalidParams, NonPositiveArgument, QuadratureNotConverged
from .graph import WeightedGraph, ball, distances_from, generate_standard
from .spectral import Spectrum, eigendecompose

__all__ = [
    "FracKernel",
    "QuadratureConfig",
    "KernelDiagnostics",
    "gamma_fn",
    "ws_spectral",
    "ws_quadrature",
    "frac_laplacian_apply",
    "cxs_bound",
    "cxs_bounds",
    "kernel_diagnostics",
    "truncation_cauchy",
    "export_kernel_csv",
    "export_bounds_csv",
    "load_kernel_csv",
]


def gamma_fn(x: float) -> float:
    """Gamma function for positive arguments."""
    x = float(x)
    if not x > 0:
        raise NonPositiveArgument(f"gamma_fn needs x > 0, got {x}")
    return math.gamma(x)


@dataclass(frozen=True, eq=False)
class FracKernel:
    s: float
    W: np.ndarray
    graph: WeightedGraph
    method: str = "spectral"
    info: dict = field(default_factory=dict, compare=False)

    @property
    def row_sums(self) -> np.ndarray:
        return self.W.sum(axis=1)

    @property
    def measure(self) -> np.ndarray:
        return self.graph.measure

    @property
    def n(self) -> int:
        return self.graph.n

    def entry(self, x, y) -> float:
        return float(self.W[self.graph.index(x), self.graph.index(y)])

    def stiffness(self) -> np.ndarray:
        """Matrix K with u^T K u = int |grad_s u|^2 dmu, i.e. K = diag(row_sums) - W."""
        return np.diag(self.row_sums) - self.W


def _finish(W, s, sp, method, info=None):
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, 0.0)
    W.flags.writeable = False
    return FracKernel(s=s, W=W, graph=sp.graph, method=method, info=info or {})


def ws_spectral(sp: Spectrum, s: float) -> FracKernel:
    """W_s(x, y) = -mu(x) mu(y) sum_k lambda_k^s phi_k(x) phi_k(y), x != y."""
    s = check_s(s)
    U = sp.orthonormal_vectors()
    r = np.sqrt(sp.measure)
    W = -(r[:, None] * U * sp.eigenvalues**s) @ (U.T * r[None, :])
    return _finish(W, s, sp, "spectral")


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for :func:`ws_quadrature`.

    The time axis is split at ``split_point``.  The inner piece uses
    t = split * v**(1/(1-s)), the outer piece t = split * tau**(-1/s); both
    are integrated on dyadic panels accumulating at 0 with Gauss-Legendre
    rules whose size doubles until successive results agree to
    ``target_rel_tol``.
    """

    split_point: float = 1.0
    nodes_inner: int = 16
    nodes_outer: int = 16
    target_rel_tol: float = 1e-10
    max_refinements: int = 5
    dyadic_panels: int = 60

    def __post_init__(self):
        if self.nodes_inner < 8 or self.nodes_outer < 8:
            raise InvalidParams("quadrature needs at least 8 nodes per panel")
        if not self.target_rel_tol > 0:
            raise InvalidParams("target_rel_tol must be positive")
        if not self.split_point > 0:
            raise InvalidParams("split_point must be positive")
        if self.max_refinements < 1:
            raise InvalidParams("max_refinements must be >= 1")


def _dyadic_rule(n_panels, k):
    x, w = leggauss(k)
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(n_panels, -1, -1, dtype=float)])
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (half[:, None] * (x[None, :] + 1.0) + a[:, None]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _series_length(c_a, diameter):
    # Poisson(c_a) tail beyond N below 1e-30; at least diameter + 30 terms.
    n = max(1, diameter + 30)
    while n < 2 * c_a or n * math.log(c_a) - math.lgamma(n + 1) > -69.0:
        n += 1
    return n


def _inner_coefficients(s, a, c, n_terms, rule):
    """a^-s * m * int_0^1 exp(-c a v^m) (c a)^j v^(m(j-1)) / j! dv  for j = 1..N."""
    v, wv = rule
    m = 1.0 / (1.0 - s)
    j = np.arange(1, n_terms + 1, dtype=float)[:, None]
    lg = np.array([math.lgamma(k + 1) for k in range(1, n_terms + 1)])[:, None]
    with np.errstate(divide="ignore"):
        logv = np.log(v)[None, :]
    expo = j * math.log(c * a) + m * (j - 1.0) * logv - c * a * v[None, :] ** m - lg
    # j == 1 has v^0 exactly; avoid 0 * -inf when a node sits at v == 0.
    expo[0] = math.log(c * a) - c * a * v**m - lg[0, 0]
    return a ** (-s) * m * (np.exp(expo) @ wv)


def _outer_coefficients(s, a, lam, rule):
    """a^-s / s * int_0^1 exp(-lambda_k a tau^(-1/s)) dtau  for each eigenvalue."""
    tau, wt = rule
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        T = a * tau ** (-1.0 / s)
        E = np.exp(-np.outer(lam, T))
    E[lam == 0.0] = 1.0
    return a ** (-s) / s * (E @ wt)


def ws_quadrature(sp: Spectrum, s: float, q: QuadratureConfig | None = None) -> FracKernel:
    """Evaluate the defining time integral of W_s numerically.

    On [0, split] the heat kernel is expanded as
    e^{t Delta} = e^{-ct} sum_j (t c)^j Qn^j / j!  with Qn = (Delta + c) / c
    row-stochastic (c = max normalized degree).  Every term is nonnegative, so
    p(t, x, y) keeps full relative accuracy as t -> 0 where the t^(-1-s)
    weight is singular.  On [split, inf) the spectral form of p is used.
    Both pieces are linear in t-independent matrices, so the quadrature is
    carried out on the scalar coefficients and summed once per level.
    """
    s = check_s(s)
    q = q or QuadratureConfig()
    g = sp.graph
    n = g.n
    a = q.split_point
    mu = g.measure

    A = g.adjacency()
    deg = A.sum(axis=1)
    c = float((deg / mu).max()) if n > 1 else 0.0
    if c > 0:
        Qn = ((A - np.diag(deg)) / mu[:, None] + c * np.eye(n)) / c
        np.clip(Qn, 0.0, None, out=Qn)
        diameter = 2 * int(distances_from(g, g.vertices[0]).max())
        n_terms = _series_length(c * a, diameter)
    else:
        Qn, n_terms = None, 0

    U = sp.eigenvectors
    levels = q.max_refinements + 1
    inner_coef, outer_coef = [], []
    for lev in range(levels):
        k_in = q.nodes_inner * 2**lev
        k_out = q.nodes_outer * 2**lev
        if n_terms:
            inner_coef.append(_inner_coefficients(s, a, c, n_terms, _dyadic_rule(q.dyadic_panels, k_in)))
        outer_coef.append(_outer_coefficients(s, a, sp.eigenvalues, _dyadic_rule(q.dyadic_panels, k_out)))

    # One pass over Qn^j shared by all refinement levels.
    inner = np.zeros((levels, n, n))
    if n_terms:
        C = np.array(inner_coef)
        P = np.eye(n)
        for j in range(n_terms):
            P = P @ Qn
            inner += C[:, j][:, None, None] * P
        inner *= mu[None, :, None]

    pref = s / gamma_fn(1.0 - s)
    off = ~np.eye(n, dtype=bool)
    prev = None
    for lev in range(levels):
        outer = (U * outer_coef[lev]) @ U.T * mu[:, None] * mu[None, :]
        W = pref * (inner[lev] + outer)
        W = 0.5 * (W + W.T)
        if prev is not None and n > 1:
            change = np.max(np.abs(W - prev)[off] / np.abs(W)[off])
            if change <= q.target_rel_tol:
                info = {"levels": lev + 1, "rel_change": float(change), "series_terms": n_terms}
                return _finish(W, s, sp, "quadrature", info)
        elif n == 1:
            return _finish(W, s, sp, "quadrature", {"levels": 1})
        prev = W
    raise QuadratureNotConverged(
        f"relative change {change:.3e} > {q.target_rel_tol} after {levels} levels"
    )


def frac_laplacian_apply(k: FracKernel, u) -> np.ndarray:
    """(-Delta)^s u(x) = 1/mu(x) sum_{y != x} W_s(x, y) (u(x) - u(y)).

    ``u`` may be a single function (n,) or a stack of functions (n, m).
    """
    u = check_length(u, k.n)
    mu = k.measure if u.ndim == 1 else k.measure[:, None]
    rs = k.row_sums if u.ndim == 1 else k.row_sums[:, None]
    return (rs * u - k.W @ u) / mu


# -- row-sum bound ----------------------------------------------------------

def _time_grid():
    return np.unique(np.concatenate([[0.0], np.logspace(-10, 0, 301), np.linspace(0.0, 1.0, 201)]))


def cxs_bounds(sp: Spectrum, s: float):
    """C_{x,s} for every vertex, plus the t in [0, 1] maximizing |d/dt p(t,x,x)|.

    C_{x,s} = mu(x) / ((1-s) Gamma(1-s)) * max(mu(x) * max_t |d/dt p(t,x,x)|, 1)
    """
    s = check_s(s)
    t = _time_grid()
    phi2 = sp.eigenvectors**2
    lam = sp.eigenvalues
    # |d/dt p(t,x,x)| = sum_k lambda_k exp(-lambda_k t) phi_k(x)^2, shape (n, len(t))
    dp = phi2 @ (lam[:, None] * np.exp(-np.outer(lam, t)))
    imax = dp.argmax(axis=1)
    peak = dp[np.arange(sp.n), imax]
    mu = sp.measure
    C = mu / ((1.0 - s) * gamma_fn(1.0 - s)) * np.maximum(mu * peak, 1.0)
    return C, t[imax]


def cxs_bound(g: WeightedGraph, sp: Spectrum, s: float, x) -> float:
    i = g.index(x)
    C, _ = cxs_bounds(sp, s)
    return float(C[i])


@dataclass
class KernelDiagnostics:
    s: float
    method: str
    symmetry_defect: float
    min_offdiagonal: float
    max_diagonal: float
    rows: list  # (vertex, row_sum, C_xs, slack)
    argmax_t: list
    max_rel_deviation: float | None = None

    @property
    def min_slack(self) -> float:
        return min(r[3] for r in self.rows)

    @property
    def ok(self) -> bool:
        good = self.symmetry_defect == 0.0 and self.max_diagonal == 0.0
        good = good and (self.min_offdiagonal > 0 or len(self.rows) < 2)
        return good and self.min_slack >= 0

    def to_dict(self):
        return {
            "s": self.s,
            "method": self.method,
            "symmetry_defect": self.symmetry_defect,
            "min_offdiagonal": self.min_offdiagonal,
            "max_diagonal": self.max_diagonal,
            "rows": [
                {"vertex": v, "row_sum": r, "C_xs": c, "slack": sl} for v, r, c, sl in self.rows
            ],
            "argmax_t": self.argmax_t,
            "max_rel_deviation": self.max_rel_deviation,
            "ok": self.ok,
        }


def kernel_diagnostics(k: FracKernel, g=None, sp=None, other: FracKernel | None = None) -> KernelDiagnostics:
    """Symmetry, positivity and row-sum-bound report for a kernel.

    When ``other`` is given (typically the quadrature kernel next to the
    spectral one) the maximal entrywise relative deviation is included.
    """
    g = g or k.graph
    sp = sp or eigendecompose(g)
    W = k.W
    n = g.n
    off = ~np.eye(n, dtype=bool)
    C, targ = cxs_bounds(sp, k.s)
    rs = k.row_sums
    rows = [(v, float(r), float(c), float(c - r)) for v, r, c in zip(g.vertices, rs, C)]
    dev = None
    if other is not None:
        dev = float(np.max(np.abs(W - other.W)[off] / np.abs(W)[off])) if n > 1 else 0.0
    return KernelDiagnostics(
        s=k.s,
        method=k.method,
        symmetry_defect=float(np.abs(W - W.T).max()),
        min_offdiagonal=float(W[off].min()) if n > 1 else math.inf,
        max_diagonal=float(np.abs(np.diag(W)).max()),
        rows=rows,
        argmax_t=[float(x) for x in targ],
        max_rel_deviation=dev,
    )


def truncation_cauchy(s: float, radii=(5, 10, 20), x="0", y="1", mu=1.0, w=1.0):
    """|W^(R)(x, y) - W^(2R)(x, y)| on balls of the integer lattice.

    Each ball uses its own (finite, stochastically complete) heat kernel.
    Returns a list of ``(R, W_R, W_2R, difference)``.
    """
    s = check_s(s)
    big = generate_standard("lattice_ball_Z", R=2 * max(radii), mu=mu, w=w)
    cache = {}

    def entry(R):
        if R not in cache:
            gR = ball(big, "0", R)
            cache[R] = ws_spectral(eigendecompose(gR), s)
        return cache[R].entry(x, y)

    out = []
    for R in radii:
        a, b = entry(R), entry(2 * R)
        out.append((R, a, b, abs(a - b)))
    return out


# -- CSV export -------------------------------------------------------------

def export_kernel_csv(k: FracKernel, path) -> None:
    """Metadata pair ``s,method`` then ``x_id,y_id,W_s`` rows for x != y."""
    V = k.graph.vertices
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["s", "method"])
        out.writerow([repr(k.s), k.method])
        out.writerow(["x_id", "y_id", "W_s"])
        for i in range(k.n):
            for j in range(k.n):
                if i != j:
                    out.writerow([V[i], V[j], repr(float(k.W[i, j]))])


def export_bounds_csv(k: FracKernel, sp: Spectrum, path) -> None:
    C, _ = cxs_bounds(sp, k.s)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x_id", "row_sum", "C_xs"])
        for v, r, c in zip(k.graph.vertices, k.row_sums, C):
            out.writerow([v, repr(float(r)), repr(float(c))])


def load_kernel_csv(path, graph: WeightedGraph) -> FracKernel:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    s, method = float(rows[1][0]), rows[1][1]
    W = np.zeros((graph.n, graph.n))
    for x, y, val in rows[3:]:
        W[graph.index(x), graph.index(y)] = float(val)
    W.flags.writeable = False
    return FracKernel(s=s, W=W, graph=graph, method=method)

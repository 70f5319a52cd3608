"""Signed solutions of (-Delta)^s u + h u = f(x, u^+/-) on a finite graph.

J(u) = 1/2 ||u||_{H_s}^2 - int F(x, u^+/-) dmu, where u^+ = max(u, 0) for the
positive branch and u^- = min(u, 0) for the negative one.  Critical points of
J solve the equation pointwise; nontrivial ones have the branch's strict sign.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_function
from .calculus import PotentialH, hs_form_matrix, lambda1, lp_norm
from .errors import (
    BracketFailure,
    HypothesisViolation,
    InvalidParam,
    NotConverged,
    WrongSignPart,
)
from .kernel import FracKernel
from .nonlinearity import Nonlinearity, check_hypotheses

__all__ = [
    "SolverConfig",
    "Solution",
    "Problem",
    "energy",
    "energy_gradient",
    "nehari_function",
    "nehari_project",
    "ray_maximum_gap",
    "ground_state_solve",
    "mountain_pass_solve",
    "sphere_barrier",
    "verify_solution",
    "export_solution",
]

BRANCHES = ("positive", "negative")
BRACKET_CAP = 2.0**60


def _check_branch(branch):
    if branch in ("pos", "+"):
        return "positive"
    if branch in ("neg", "-"):
        return "negative"
    if branch not in BRANCHES:
        raise InvalidParam(f"branch must be 'positive' or 'negative', got {branch!r}")
    return branch


def signed_part(u, branch):
    return np.maximum(u, 0.0) if branch == "positive" else np.minimum(u, 0.0)


@dataclass(frozen=True)
class SolverConfig:
    tol_residual: float = 1e-9
    max_iters: int = 10000
    step: float = 0.1
    backtrack: float = 0.5
    nehari_bisect_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise InvalidParam("tol_residual must be positive")
        if int(self.max_iters) < 1:
            raise InvalidParam("max_iters must be >= 1")
        if not self.step > 0:
            raise InvalidParam("step must be positive")
        if not 0 < self.backtrack < 1:
            raise InvalidParam("backtrack must lie in (0, 1)")
        if not self.nehari_bisect_tol > 0:
            raise InvalidParam("nehari_bisect_tol must be positive")


@dataclass
class Solution:
    u: np.ndarray
    branch: str
    energy: float
    residual_inf: float
    nehari_defect: float
    iterations: int
    converged: bool
    s: float = float("nan")
    method: str = ""
    vertices: tuple = ()
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "branch": self.branch,
            "s": self.s,
            "energy": self.energy,
            "residual_inf": self.residual_inf,
            "nehari_defect": self.nehari_defect,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "u": {str(v): float(x) for v, x in zip(self.vertices, self.u)},
        }


class Problem:
    """Precomputed pieces of J for one (kernel, potential, nonlinearity, branch)."""

    def __init__(self, k: FracKernel, h, nl: Nonlinearity, branch: str):
        if not isinstance(h, PotentialH):
            h = PotentialH.from_values(k.graph, h)
        self.k, self.h, self.nl = k, h, nl
        self.branch = _check_branch(branch)
        self.mu = k.measure
        self.A = hs_form_matrix(k, h)
        self.x = np.arange(k.n)

    def part(self, u):
        return signed_part(u, self.branch)

    def _fx(self, u):
        if u.ndim == 2:
            return self.x[:, None]
        return self.x

    def energy(self, u):
        up = self.part(u)
        quad = 0.5 * np.einsum("i...,ij,j...->...", u, self.A, u)
        with np.errstate(over="ignore", invalid="ignore"):
            return quad - np.einsum("i...,i->...", self.nl.F(self._fx(u), up), self.mu)

    def gradient(self, u):
        """L^2(mu) gradient (A u)/mu - f(x, u^+/-)."""
        with np.errstate(over="ignore", invalid="ignore"):
            return (self.A @ u) / self.mu - self.nl.f(self.x, self.part(u))

    def residual(self, u):
        return float(np.abs(self.gradient(u)).max())

    def hessian(self, u):
        """Euclidean Hessian of J."""
        up = self.part(u)
        d = self.nl.derivative(self.x, up)
        d = np.where(up != 0, d, 0.0)
        return self.A - np.diag(d * self.mu)

    def norm2(self, u):
        return float(u @ self.A @ u)

    def nehari_defect(self, u):
        return abs(float(np.sum(self.gradient(u) * u * self.mu)))


def _problem(k, h, nl, branch):
    return Problem(k, h, nl, branch)


def energy(k: FracKernel, h, nl: Nonlinearity, u, branch: str = "positive") -> float:
    u = as_function(u, k.graph)
    return float(_problem(k, h, nl, branch).energy(u))


def energy_gradient(k: FracKernel, h, nl: Nonlinearity, u, branch: str = "positive") -> np.ndarray:
    """Vector g with sum g phi mu = dJ(u)[phi]."""
    u = as_function(u, k.graph)
    return _problem(k, h, nl, branch).gradient(u)


def nehari_function(P: Problem, u, t):
    """gbar(t) = ||u||^2 - sum_{u^+/- != 0} (u^+/-)^2 f(x, t u^+/-) / (t u^+/-) mu."""
    up = P.part(u)
    nz = up != 0
    y = up[nz]
    with np.errstate(over="ignore", invalid="ignore"):
        q = P.nl.f(P.x[nz], t * y) / (t * y)
        val = P.norm2(u) - float(np.sum(y**2 * q * P.mu[nz]))
    return -np.inf if np.isnan(val) else val


def _nehari(P: Problem, u, tol):
    up = P.part(u)
    if not np.any(up != 0):
        raise WrongSignPart(f"{P.branch} part of u vanishes identically")
    g = lambda t: nehari_function(P, u, t)  # noqa: E731
    lo = hi = 1.0
    if g(1.0) > 0:
        while g(hi) > 0:
            lo, hi = hi, 2 * hi
            if hi > BRACKET_CAP:
                raise BracketFailure("no sign change of the Nehari function below 2**60")
    else:
        while g(lo) <= 0:
            hi, lo = lo, lo / 2
            if lo < 1 / BRACKET_CAP:
                raise BracketFailure("no sign change of the Nehari function above 2**-60")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    t0 = 0.5 * (lo + hi)
    return t0, t0 * u


def nehari_project(k: FracKernel, h, nl: Nonlinearity, u, branch: str = "positive", tol: float = 1e-12):
    """Unique t0 > 0 with t0 u on the Nehari manifold, found by bracketing from
    t = 1 (doubling or halving) and bisection."""
    u = as_function(u, k.graph)
    return _nehari(_problem(k, h, nl, branch), u, tol)


def ray_maximum_gap(P: Problem, u, t_grid=None) -> float:
    """|J(u) - max_t J(t u)| over a dense log grid on [1e-3, 1e3] (t = 1 included)."""
    if t_grid is None:
        t_grid = np.unique(np.concatenate([np.logspace(-3, 3, 20001), [1.0]]))
    U = np.outer(u, t_grid)
    vals = P.energy(U)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    return abs(float(vals.max()) - float(P.energy(u)))


def _initial(P: Problem, seed):
    rng = np.random.default_rng(seed)
    u0 = 1.0 + 0.1 * rng.uniform(0.0, 1.0, P.k.n)
    return u0 if P.branch == "positive" else -u0


def _guard_hypotheses(P: Problem):
    lam = lambda1(P.k, P.h)
    rep = check_hypotheses(P.nl, lam, branch=P.branch)
    if not rep["ok"]:
        bad = [c for c in ("F1", "F2", "F3", "F4", "F5") if not rep[c]]
        warnings.warn(f"nonlinearity {P.nl.name!r} fails grid checks {bad}", RuntimeWarning, stacklevel=3)
    return rep


def _project(P, u, tol):
    try:
        return _nehari(P, u, tol)
    except BracketFailure as exc:
        raise HypothesisViolation(str(exc)) from exc


def _finish(P, u, iters, converged, method, **extra):
    return Solution(
        u=u.copy(),
        branch=P.branch,
        energy=float(P.energy(u)),
        residual_inf=P.residual(u),
        nehari_defect=P.nehari_defect(u),
        iterations=int(iters),
        converged=bool(converged),
        s=P.k.s,
        method=method,
        vertices=P.k.graph.vertices,
        extra=extra,
    )


def _fail(sol, msg, raise_on_fail):
    if raise_on_fail:
        raise NotConverged(msg, sol)
    return sol


def ground_state_solve(k: FracKernel, h, nl: Nonlinearity, branch: str = "positive",
                       cfg: SolverConfig | None = None, raise_on_fail: bool = True) -> Solution:
    """Nehari-projected gradient descent.

    Each iteration tries u - step * grad J(u), rescales onto the Nehari
    manifold and halves the step until J does not increase.  The step is
    reset to ``cfg.step`` at every iteration.
    """
    cfg = cfg or SolverConfig()
    P = _problem(k, h, nl, branch)
    _guard_hypotheses(P)
    _, u = _project(P, _initial(P, cfg.seed), cfg.nehari_bisect_tol)
    J = P.energy(u)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = P.gradient(u)
        if np.abs(g).max() <= cfg.tol_residual:
            return _finish(P, u, it - 1, True, "nehari_descent")
        step = cfg.step
        while True:
            cand = u - step * g
            if np.any(P.part(cand) != 0):
                _, cand = _project(P, cand, cfg.nehari_bisect_tol)
                Jc = P.energy(cand)
                # below ~1e-8 residual the decrease is under energy round-off
                if Jc <= J + 1e-13 * max(1.0, abs(J)):
                    break
            step *= cfg.backtrack
            if step < 1e-14:
                sol = _finish(P, u, it, False, "nehari_descent")
                return _fail(sol, "line search stalled", raise_on_fail)
        u, J = cand, Jc
    done = P.residual(u) <= cfg.tol_residual
    sol = _finish(P, u, cfg.max_iters, done, "nehari_descent")
    if done:
        return sol
    return _fail(sol, f"residual {sol.residual_inf:.3e} after {cfg.max_iters} iterations", raise_on_fail)


# -- mountain pass -----------------------------------------------------------

def _respace(path):
    """Re-parametrize a polyline to equal chord length, endpoints fixed."""
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return path
    target = np.linspace(0.0, s[-1], len(path))
    return np.stack([np.interp(target, s, path[:, j]) for j in range(path.shape[1])], axis=1)


def _newton(P: Problem, u, tol, max_iters=50):
    """Newton iteration on grad J = 0 with residual-decreasing damping."""
    res = P.residual(u)
    for it in range(max_iters):
        if res <= tol:
            return u, it, True
        grad = P.A @ u - P.nl.f(P.x, P.part(u)) * P.mu
        try:
            d = np.linalg.solve(P.hessian(u), -grad)
        except np.linalg.LinAlgError:
            return u, it, False
        lam = 1.0
        while lam > 1e-8:
            cand = u + lam * d
            rc = P.residual(cand)
            if rc < res:
                break
            lam *= 0.5
        else:
            return u, it, res <= tol
        u, res = cand, rc
    return u, max_iters, res <= tol


def _endpoint(P: Problem, u0):
    T = 1.0
    while P.energy(T * u0) >= 0:
        T *= 2.0
        if T > BRACKET_CAP:
            raise HypothesisViolation("J(T u0) stays nonnegative up to T = 2**60")
    return T


def mountain_pass_solve(k: FracKernel, h, nl: Nonlinearity, branch: str = "positive",
                        cfg: SolverConfig | None = None, path_nodes: int = 21,
                        raise_on_fail: bool = True, path_tol: float = 1e-4) -> Solution:
    """Discrete mountain pass between 0 and T u0 with J(T u0) < 0.

    The highest interior node of a polyline is moved against the part of
    grad J orthogonal to the path, then the path is re-spaced to equal chord
    length.  Once that gradient is below ``path_tol`` (or the iteration budget
    runs out) the top node is refined by Newton's method on grad J = 0, which
    converges to the nearby saddle rather than sliding downhill.
    """
    cfg = cfg or SolverConfig()
    if path_nodes < 3:
        raise InvalidParam("path_nodes must be at least 3")
    P = _problem(k, h, nl, branch)
    _guard_hypotheses(P)
    u0 = _initial(P, cfg.seed)
    T = _endpoint(P, u0)
    ts = np.linspace(0.0, 1.0, path_nodes)
    path = np.outer(ts, T * u0)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        vals = P.energy(path.T)
        i = 1 + int(np.argmax(vals[1:-1]))
        node = path[i]
        g = P.gradient(node)
        tangent = path[i + 1] - path[i - 1]
        tangent = tangent / np.linalg.norm(tangent)
        g_perp = g - (g @ tangent) * tangent
        if np.abs(g_perp).max() <= path_tol:
            break
        step = cfg.step
        while step > 1e-14:
            cand = node - step * g_perp
            if P.energy(cand) < vals[i]:
                break
            step *= cfg.backtrack
        path[i] = cand
        path = _respace(path)
        if P.energy(path[-1]) >= 0:
            path[-1] = path[-1] * 2.0
    top = path[1 + int(np.argmax(P.energy(path.T)[1:-1]))]
    u, newton_iters, ok = _newton(P, top, cfg.tol_residual)
    nontrivial = np.all(P.part(u) != 0) and np.abs(u).max() > 1e-8
    sol = _finish(P, u, it + newton_iters, ok and nontrivial, "mountain_pass",
                  endpoint_scale=T, path_iterations=it)
    if sol.converged:
        return sol
    return _fail(sol, "mountain-pass polish did not reach a nontrivial critical point", raise_on_fail)


def sphere_barrier(k: FracKernel, h, nl: Nonlinearity, branch: str = "positive",
                   n_samples: int = 100, seed: int = 0, eps_fraction: float = 0.5) -> dict:
    """Sample J on the H_s-sphere of radius r = min(1, eps eta^3 / (4 lambda1 C2 C3)).

    eps = eps_fraction * lambda1; eta is the largest |y| <= 1 (on a grid) with
    (y / alpha) f(x, y) <= (lambda1 - eps)/2 y^2 on (0, eta); C1, C2 are the
    sup and L^3 embedding constants on the unit ball of H_s and
    C3 = max_{|y| <= C1} (y / alpha) f(x, y).
    """
    P = _problem(k, h, nl, branch)
    lam = lambda1(k, P.h)
    eps = eps_fraction * lam
    sign = 1.0 if P.branch == "positive" else -1.0
    mu0 = float(P.mu.min())
    m = min(1.0, P.h.h0)
    C1 = 1.0 / np.sqrt(mu0 * m)
    C2 = mu0**-0.5 * m**-1.5
    x = P.x[:, None]
    y = sign * np.linspace(1e-6, 1.0, 100001)
    with np.errstate(over="ignore", invalid="ignore"):
        ok = (y[None, :] / nl.alpha) * nl.f(x, np.broadcast_to(y, (k.n, y.size))) <= (lam - eps) / 2 * y**2
    ok = ok.all(axis=0)
    bad = np.flatnonzero(~ok)
    eta = abs(y[bad[0] - 1]) if len(bad) and bad[0] > 0 else (abs(y[-1]) if not len(bad) else 0.0)
    yc = sign * np.linspace(0.0, C1, 10001)
    with np.errstate(over="ignore", invalid="ignore"):
        C3 = float(np.max((yc[None, :] / nl.alpha) * nl.f(x, np.broadcast_to(yc, (k.n, yc.size)))))
    r = min(1.0, eps * eta**3 / (4 * lam * C2 * C3)) if C3 > 0 else 1.0
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(n_samples):
        v = rng.standard_normal(k.n)
        v *= r / np.sqrt(P.norm2(v))
        vals.append(float(P.energy(v)))
    return {"r": r, "eps": eps, "eta": eta, "C1": C1, "C2": C2, "C3": C3,
            "lambda1": lam, "min_energy": min(vals), "ok": min(vals) > 0}


def verify_solution(k: FracKernel, h, nl: Nonlinearity, sol: Solution, tol: float | None = None) -> dict:
    """Pointwise residual, strict sign, Nehari membership, ray maximum and energy sign."""
    P = _problem(k, h, nl, sol.branch)
    u = np.asarray(sol.u, dtype=float)
    tol = 1e-9 if tol is None else tol
    trivial = bool(np.all(u == 0))
    res = P.residual(u)
    sign_ok = bool(u.min() > 0) if P.branch == "positive" else bool(u.max() < 0)
    defect = P.nehari_defect(u)
    norm2 = P.norm2(u)
    gap = ray_maximum_gap(P, u) if not trivial else float("inf")
    J = float(P.energy(u))
    rep = {
        "trivial": trivial,
        "residual_inf": res,
        "residual_ok": res <= tol,
        "strict_sign": sign_ok,
        "nehari_defect": defect,
        "nehari_ok": (not trivial) and defect <= 1e-8 * max(norm2, 1.0),
        "ray_gap": gap,
        "ray_ok": gap <= 1e-8,
        "energy": J,
        "energy_positive": J > 0,
        "l2_norm": lp_norm(u, P.mu, 2),
    }
    rep["ok"] = (not trivial) and all(rep[c] for c in
                                      ("residual_ok", "strict_sign", "nehari_ok", "ray_ok", "energy_positive"))
    return rep


def export_solution(sol: Solution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sol.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

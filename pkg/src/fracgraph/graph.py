"""Weighted, locally finite graphs G = (V, E, mu, w).

Vertices are opaque strings.  The insertion order of ``vertices`` fixes the
integer index used by every matrix-valued routine in the package.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    Disconnected,
    DuplicateEdge,
    GraphIOError,
    InvalidParams,
    NonPositiveMeasure,
    NonPositiveWeight,
    ParseError,
    SelfLoop,
    UnknownEndpoint,
    UnknownVertex,
)

__all__ = [
    "WeightedGraph",
    "ValidationReport",
    "build_graph",
    "validate_graph",
    "graph_distance",
    "distances_from",
    "ball",
    "generate_standard",
    "load_graph",
    "save_graph",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable weighted graph.

    Attributes
    ----------
    vertices : tuple of str
        Vertex identifiers in index order.
    measure : ndarray, shape (n,)
        Vertex measures mu(x) > 0.
    edges : tuple of (int, int, float)
        Each undirected edge once, stored with ``i < j``.
    """

    vertices: tuple
    measure: np.ndarray
    edges: tuple
    _index: dict = field(repr=False, compare=False)
    _neighbors: tuple = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def neighbors(self, i: int) -> tuple:
        """Indices of the neighbours of vertex index ``i``."""
        return self._neighbors[i]

    def weight(self, x, y) -> float:
        i, j = self.index(x), self.index(y)
        return float(self.adjacency()[i, j])

    def mu(self, x) -> float:
        return float(self.measure[self.index(x)])

    def adjacency(self) -> np.ndarray:
        """Dense symmetric weight matrix with zero diagonal."""
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A

    def degree(self) -> np.ndarray:
        """Weighted degree sum_{y~x} w_xy."""
        d = np.zeros(self.n)
        for i, j, w in self.edges:
            d[i] += w
            d[j] += w
        return d

    def edge_list(self):
        """Edges as ``(x_id, y_id, w)`` triples."""
        return [(self.vertices[i], self.vertices[j], w) for i, j, w in self.edges]

    def is_connected(self) -> bool:
        return self.n > 0 and len(_bfs(self, 0)) == self.n

    def require_connected(self):
        if not self.is_connected():
            raise Disconnected("graph is not connected")

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return _canonical(self) == _canonical(other)

    def __hash__(self):
        return hash(_canonical(self))

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={len(self.edges)})"


def _canonical(g):
    mus = frozenset(zip(g.vertices, g.measure.tolist()))
    es = frozenset(
        (frozenset((g.vertices[i], g.vertices[j])), w) for i, j, w in g.edges
    )
    return mus, es


def build_graph(vertices: Iterable, measures: Mapping, edges: Iterable) -> WeightedGraph:
    """Validate raw data and assemble a :class:`WeightedGraph`.

    ``edges`` holds ``(x, y, w)`` triples; each unordered pair may appear once.
    """
    verts = tuple(str(v) for v in vertices)
    index = {}
    for v in verts:
        if v in index:
            raise InvalidParams(f"duplicate vertex {v!r}")
        index[v] = len(index)

    mu = np.empty(len(verts))
    for v in verts:
        if v not in measures:
            raise NonPositiveMeasure(f"no measure given for vertex {v!r}")
        m = float(measures[v])
        if not (m > 0 and math.isfinite(m)):
            raise NonPositiveMeasure(f"mu({v!r}) = {m} is not a positive real")
        mu[index[v]] = m

    seen = set()
    stored = []
    nbrs = [[] for _ in verts]
    for x, y, w in edges:
        x, y = str(x), str(y)
        for v in (x, y):
            if v not in index:
                raise UnknownEndpoint(f"edge endpoint {v!r} is not a vertex")
        if x == y:
            raise SelfLoop(f"self-loop at {x!r}")
        w = float(w)
        if not (w > 0 and math.isfinite(w)):
            raise NonPositiveWeight(f"w({x!r},{y!r}) = {w} is not a positive real")
        i, j = sorted((index[x], index[y]))
        if (i, j) in seen:
            raise DuplicateEdge(f"edge {{{x!r},{y!r}}} given twice")
        seen.add((i, j))
        stored.append((i, j, w))
        nbrs[i].append(j)
        nbrs[j].append(i)

    stored.sort()
    return WeightedGraph(
        vertices=verts,
        measure=_frozen(mu),
        edges=tuple(stored),
        _index=index,
        _neighbors=tuple(tuple(sorted(nb)) for nb in nbrs),
    )


@dataclass(frozen=True)
class ValidationReport:
    connected: bool
    min_measure: float
    max_normalized_degree: float
    stochastically_complete_sufficient: bool
    issues: tuple = ()

    def to_dict(self):
        return {
            "connected": self.connected,
            "min_measure": self.min_measure,
            "max_normalized_degree": self.max_normalized_degree,
            "stochastically_complete_sufficient": self.stochastically_complete_sufficient,
            "issues": list(self.issues),
        }


def _bfs(g, start):
    dist = {start: 0}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in g.neighbors(i):
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def validate_graph(g: WeightedGraph) -> ValidationReport:
    """Check connectivity and the bounded-degree test for stochastic completeness.

    Findings are reported, never raised.
    """
    issues = []
    if g.n == 0:
        return ValidationReport(False, math.nan, math.nan, False, ("graph has no vertices",))
    reached = _bfs(g, 0)
    connected = len(reached) == g.n
    if not connected:
        missing = [g.vertices[i] for i in range(g.n) if i not in reached]
        issues.append(
            f"not connected: {len(missing)} vertices unreachable from "
            f"{g.vertices[0]!r} (e.g. {missing[0]!r})"
        )
    ndeg = g.degree() / g.measure
    max_nd = float(ndeg.max())
    sufficient = math.isfinite(max_nd)
    if not sufficient:
        issues.append("normalized degree is unbounded")
    isolated = [g.vertices[i] for i in range(g.n) if not g.neighbors(i)]
    if isolated and g.n > 1:
        issues.append(f"isolated vertices: {isolated}")
    return ValidationReport(
        connected=connected,
        min_measure=float(g.measure.min()),
        max_normalized_degree=max_nd,
        stochastically_complete_sufficient=sufficient,
        issues=tuple(issues),
    )


def distances_from(g: WeightedGraph, x0) -> np.ndarray:
    """Hop distances d(x, x0) for every vertex; -1 marks unreachable vertices."""
    dist = _bfs(g, g.index(x0))
    out = np.full(g.n, -1, dtype=int)
    for i, d in dist.items():
        out[i] = d
    return out


def graph_distance(g: WeightedGraph, x, x0) -> int:
    """Minimum number of edges on a path between ``x`` and ``x0``."""
    i = g.index(x)
    d = distances_from(g, x0)[i]
    if d < 0:
        raise Disconnected(f"{x!r} and {x0!r} lie in different components")
    return int(d)


def ball(g: WeightedGraph, x0, r: int) -> WeightedGraph:
    """Induced subgraph on B_r(x0) = {x : d(x, x0) <= r}."""
    if r < 0:
        raise InvalidParams("radius must be nonnegative")
    d = distances_from(g, x0)
    keep = [i for i in range(g.n) if 0 <= d[i] <= r]
    keep_set = set(keep)
    verts = [g.vertices[i] for i in keep]
    mus = {g.vertices[i]: g.measure[i] for i in keep}
    edges = [
        (g.vertices[i], g.vertices[j], w)
        for i, j, w in g.edges
        if i in keep_set and j in keep_set
    ]
    return build_graph(verts, mus, edges)


# -- generators -------------------------------------------------------------

def _size(params, key, minimum):
    if key not in params:
        raise InvalidParams(f"missing parameter {key!r}")
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < minimum:
        raise InvalidParams(f"{key} must be an integer >= {minimum}, got {v!r}")
    return int(v)


def generate_standard(kind: str, params: Mapping | None = None, **kw) -> WeightedGraph:
    """Deterministic test graphs.

    Vertex ordering per kind:

    ``path`` (n)       -- ``v0 .. v{n-1}`` along the path.
    ``cycle`` (n >= 3) -- ``v0 .. v{n-1}`` around the cycle.
    ``star`` (n >= 2)  -- centre ``v0`` then leaves ``v1 .. v{n-1}``.
    ``lattice_ball_Z`` (R)  -- integers ``-R .. R`` ascending, ids ``str(i)``.
    ``lattice_ball_Z2`` (R) -- points with ``|i| + |j| <= R`` sorted by
    ``(i, j)``, ids ``"i,j"``.

    Optional ``mu`` and ``w`` set uniform measure and edge weight (default 1).
    """
    p = dict(params or {})
    p.update(kw)
    mu = float(p.pop("mu", 1.0))
    w = float(p.pop("w", 1.0))

    if kind == "path":
        n = _size(p, "n", 1)
        verts = [f"v{i}" for i in range(n)]
        edges = [(verts[i], verts[i + 1], w) for i in range(n - 1)]
    elif kind == "cycle":
        n = _size(p, "n", 3)
        verts = [f"v{i}" for i in range(n)]
        edges = [(verts[i], verts[(i + 1) % n], w) for i in range(n)]
    elif kind == "star":
        n = _size(p, "n", 2)
        verts = [f"v{i}" for i in range(n)]
        edges = [(verts[0], verts[i], w) for i in range(1, n)]
    elif kind == "lattice_ball_Z":
        R = _size(p, "R", 0)
        verts = [str(i) for i in range(-R, R + 1)]
        edges = [(str(i), str(i + 1), w) for i in range(-R, R)]
    elif kind == "lattice_ball_Z2":
        R = _size(p, "R", 0)
        pts = sorted(
            (i, j) for i in range(-R, R + 1) for j in range(-R, R + 1) if abs(i) + abs(j) <= R
        )
        pset = set(pts)
        verts = [f"{i},{j}" for i, j in pts]
        edges = []
        for i, j in pts:
            for a, b in ((i + 1, j), (i, j + 1)):
                if (a, b) in pset:
                    edges.append((f"{i},{j}", f"{a},{b}", w))
    else:
        raise InvalidParams(f"unknown graph kind {kind!r}")
    unused = set(p) - {"n", "R"}
    if unused:
        raise InvalidParams(f"unexpected parameters for {kind}: {sorted(unused)}")
    return build_graph(verts, {v: mu for v in verts}, edges)


# -- persistence ------------------------------------------------------------

def save_graph(g: WeightedGraph, path) -> None:
    """Write ``g`` as JSON; ``repr`` of floats keeps full round-trip precision."""
    doc = {
        "vertices": [{"id": v, "mu": float(m)} for v, m in zip(g.vertices, g.measure)],
        "edges": [{"u": x, "v": y, "w": float(w)} for x, y, w in g.edge_list()],
    }
    try:
        Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise GraphIOError(f"cannot write graph to {path}: {exc}") from exc


def _number(obj, key, where):
    v = obj.get(key) if isinstance(obj, dict) else None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: field {key!r} must be a number")
    return float(v)


def load_graph(path) -> WeightedGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphIOError(f"cannot read graph file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("vertices"), list):
        raise ParseError("top level must be an object with a 'vertices' list")
    edges_raw = doc.get("edges", [])
    if not isinstance(edges_raw, list):
        raise ParseError("'edges' must be a list")
    verts, mus = [], {}
    for k, item in enumerate(doc["vertices"]):
        if not isinstance(item, dict) or not isinstance(item.get("id"), str):
            raise ParseError(f"vertices[{k}]: expected {{'id': str, 'mu': number}}")
        verts.append(item["id"])
        mus[item["id"]] = _number(item, "mu", f"vertices[{k}]")
    edges = []
    for k, item in enumerate(edges_raw):
        if not isinstance(item, dict) or not all(isinstance(item.get(f), str) for f in "uv"):
            raise ParseError(f"edges[{k}]: expected {{'u': str, 'v': str, 'w': number}}")
        edges.append((item["u"], item["v"], _number(item, "w", f"edges[{k}]")))
    return build_graph(verts, mus, edges)

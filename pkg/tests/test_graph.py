import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgraph.errors import (
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
from fracgraph.graph import (
    ball,
    build_graph,
    distances_from,
    generate_standard,
    graph_distance,
    load_graph,
    save_graph,
    validate_graph,
)


def k2(mu_a=1.0, w=1.0):
    return build_graph(["a", "b"], {"a": mu_a, "b": 1.0}, [("a", "b", w)])


def test_build_k2_indices():
    g = k2()
    assert g.n == 2 and g.index("a") == 0 and g.index("b") == 1
    assert g.weight("a", "b") == g.weight("b", "a") == 1.0
    assert g.weight("a", "a") == 0.0


def test_path_matches_generator_up_to_names():
    g = build_graph("abc", {v: 1 for v in "abc"}, [("a", "b", 1), ("b", "c", 1)])
    p = generate_standard("path", n=3)
    np.testing.assert_array_equal(g.adjacency(), p.adjacency())


@pytest.mark.parametrize(
    "verts, mus, edges, exc",
    [
        ("ab", {"a": 1, "b": 1}, [("a", "a", 1)], SelfLoop),
        ("ab", {"a": 0, "b": 1}, [("a", "b", 1)], NonPositiveMeasure),
        ("ab", {"a": 1}, [("a", "b", 1)], NonPositiveMeasure),
        ("ab", {"a": 1, "b": 1}, [("a", "b", -1)], NonPositiveWeight),
        ("ab", {"a": 1, "b": 1}, [("a", "b", float("nan"))], NonPositiveWeight),
        ("ab", {"a": 1, "b": 1}, [("a", "z", 1)], UnknownEndpoint),
        ("ab", {"a": 1, "b": 1}, [("a", "b", 1), ("b", "a", 2)], DuplicateEdge),
    ],
)
def test_build_errors(verts, mus, edges, exc):
    with pytest.raises(exc):
        build_graph(list(verts), mus, edges)


def test_unknown_vertex_is_keyerror():
    with pytest.raises(KeyError):
        k2().index("zz")
    with pytest.raises(UnknownVertex):
        k2().mu("zz")


def test_validate_k2():
    rep = validate_graph(k2())
    assert rep.connected and rep.stochastically_complete_sufficient
    assert rep.max_normalized_degree == 1.0
    assert rep.issues == ()


def test_validate_two_isolated():
    g = build_graph(["a", "b"], {"a": 1, "b": 1}, [])
    rep = validate_graph(g)
    assert not rep.connected
    assert any("not connected" in s for s in rep.issues)


def test_validate_normalized_degree():
    assert validate_graph(k2(mu_a=0.5, w=2.0)).max_normalized_degree == 4.0


def test_distances():
    p3 = generate_standard("path", n=3)
    assert graph_distance(p3, "v0", "v2") == 2
    for v in p3.vertices:
        assert graph_distance(p3, v, v) == 0
    assert graph_distance(generate_standard("cycle", n=6), "v0", "v3") == 3
    with pytest.raises(UnknownVertex):
        graph_distance(p3, "v0", "nope")


def test_distance_disconnected():
    g = build_graph(["a", "b"], {"a": 1, "b": 1}, [])
    with pytest.raises(Disconnected):
        graph_distance(g, "a", "b")
    assert list(distances_from(g, "a")) == [0, -1]


def test_lattice_distance_matches_abs():
    g = generate_standard("lattice_ball_Z", R=7)
    d = distances_from(g, "0")
    assert list(d) == [abs(int(v)) for v in g.vertices]


def test_ball():
    p3 = generate_standard("path", n=3)
    assert ball(p3, "v1", 1) == p3
    b0 = ball(p3, "v0", 0)
    assert b0.vertices == ("v0",) and b0.edges == ()
    seg = generate_standard("lattice_ball_Z", R=5)
    assert ball(seg, "0", 2) == generate_standard("lattice_ball_Z", R=2)
    with pytest.raises(UnknownVertex):
        ball(p3, "x", 1)


def test_generators():
    assert generate_standard("path", n=2) == build_graph(["v0", "v1"], {"v0": 1, "v1": 1}, [("v0", "v1", 1)])
    c4 = generate_standard("cycle", n=4)
    assert len(c4.edges) == 4
    z = generate_standard("lattice_ball_Z", {"R": 10})
    assert z.n == 21 and len(z.edges) == 20
    z2 = generate_standard("lattice_ball_Z2", R=2)
    assert z2.n == 13 and len(z2.edges) == 16
    s = generate_standard("star", n=5)
    assert list(s.degree()) == [4, 1, 1, 1, 1]
    w = generate_standard("path", n=3, mu=2.0, w=0.5)
    assert np.all(w.measure == 2.0) and all(e[2] == 0.5 for e in w.edges)


@pytest.mark.parametrize("kind, params", [
    ("path", {}), ("path", {"n": 0}), ("cycle", {"n": 2}), ("star", {"n": 1.5}),
    ("hexagon", {"n": 3}), ("path", {"n": 3, "bogus": 1}), ("lattice_ball_Z", {"R": -1}),
])
def test_generator_errors(kind, params):
    with pytest.raises(InvalidParams):
        generate_standard(kind, params)


def test_equality_ignores_vertex_order():
    g1 = build_graph(["a", "b", "c"], {"a": 1, "b": 2, "c": 3}, [("a", "b", 1), ("b", "c", 2)])
    g2 = build_graph(["c", "a", "b"], {"a": 1, "b": 2, "c": 3}, [("c", "b", 2), ("b", "a", 1)])
    assert g1 == g2 and hash(g1) == hash(g2)


def test_save_load_roundtrip(tmp_path):
    g = k2(mu_a=0.3, w=1 / 3)
    save_graph(g, tmp_path / "g.json")
    assert load_graph(tmp_path / "g.json") == g


def test_load_parse_error_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "vertices": [\n    {"id": "a", "mu": 1},\n    oops\n  ]\n}\n')
    with pytest.raises(ParseError) as ei:
        load_graph(p)
    assert ei.value.line == 4
    assert "line 4" in str(ei.value)


def test_load_schema_errors(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"vertices": [{"id": "a"}]}))
    with pytest.raises(ParseError):
        load_graph(p)
    p.write_text(json.dumps({"vertices": [{"id": "a", "mu": -1}], "edges": []}))
    with pytest.raises(NonPositiveMeasure):
        load_graph(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(GraphIOError):
        load_graph(tmp_path / "missing.json")


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 7))
    verts = [f"x{i}" for i in range(n)]
    pos = st.floats(1e-3, 1e3, allow_nan=False)
    mus = {v: draw(pos) for v in verts}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    edges = [(verts[i], verts[j], draw(pos)) for i, j in chosen]
    return build_graph(verts, mus, edges)


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_roundtrip_property(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("rt") / "g.json"
    save_graph(g, path)
    h = load_graph(path)
    assert h == g
    np.testing.assert_array_equal(h.adjacency(), g.adjacency())


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_adjacency_symmetric_and_connectivity(g):
    A = g.adjacency()
    assert np.array_equal(A, A.T) and np.all(np.diag(A) == 0)
    # connectivity via matrix powers as an independent oracle
    reach = np.linalg.matrix_power(np.eye(g.n) + (A > 0), max(g.n - 1, 1)) > 0
    assert validate_graph(g).connected == bool(reach[0].all())

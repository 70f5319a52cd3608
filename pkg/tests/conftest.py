import numpy as np
import pytest

from fracgraph.graph import build_graph, generate_standard
from fracgraph.spectral import eigendecompose

_ACCEPTANCE = []


def record_acceptance(number, ok, detail):
    _ACCEPTANCE.append((number, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")


def standard_graphs():
    return {
        "K2": generate_standard("path", n=2),
        "P3": generate_standard("path", n=3),
        "C4": generate_standard("cycle", n=4),
        "star5": generate_standard("star", n=5),
        "Z10": generate_standard("lattice_ball_Z", R=10),
    }


def weighted_graph():
    """Non-uniform measure and weights, to catch mu convention slips."""
    return build_graph(
        ["a", "b", "c", "d"],
        {"a": 1.0, "b": 2.0, "c": 0.5, "d": 1.5},
        [("a", "b", 1.0), ("b", "c", 2.5), ("c", "d", 0.7), ("a", "c", 0.3)],
    )


ALL_GRAPHS = {**standard_graphs(), "weighted4": weighted_graph(),
              "Z2_2": generate_standard("lattice_ball_Z2", R=2)}


@pytest.fixture(params=sorted(ALL_GRAPHS))
def graph(request):
    return ALL_GRAPHS[request.param]


@pytest.fixture
def spectrum(graph):
    return eigendecompose(graph)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

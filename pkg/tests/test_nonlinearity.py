import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgraph.errors import InvalidParam, UnknownName
from fracgraph.nonlinearity import Nonlinearity, builtin_nonlinearity, check_hypotheses

EXPO = builtin_nonlinearity("paper_example")
CUBIC = builtin_nonlinearity("cubic")


def test_paper_example_values():
    assert EXPO.f(0, np.array(0.0)) == 0
    assert EXPO.f(0, np.array(1.0)) == pytest.approx(math.e - 1, rel=1e-15)
    assert EXPO.f(0, np.array(-1.0)) == pytest.approx(-(math.e - 1), rel=1e-15)
    assert EXPO.F(0, np.array(1.0)) == pytest.approx((math.e - 2) / 2, rel=1e-14)
    assert EXPO.F(0, np.array(-1.0)) == pytest.approx((math.e - 2) / 4, rel=1e-14)
    assert EXPO.alpha == 2.5


def test_primitive_small_arguments_do_not_cancel():
    y = np.array([1e-8, 1e-4, -1e-3])
    expected = np.array([y[0] ** 4 / 4, y[1] ** 4 / 4, y[2] ** 8 / 8])
    np.testing.assert_allclose(EXPO.F(0, y), expected, rtol=1e-3)


@pytest.mark.parametrize("nl", [EXPO, CUBIC, builtin_nonlinearity("power_p", p=2.5)], ids=lambda n: n.name)
def test_primitive_is_antiderivative(nl):
    # F(b) - F(a) = int_a^b f by composite Simpson on a fine grid
    for a, b in ((0.0, 1.3), (-1.2, 0.0), (0.2, 0.9)):
        y = np.linspace(a, b, 20001)
        fy = nl.f(0, y)
        h = y[1] - y[0]
        simpson = h / 3 * (fy[0] + fy[-1] + 4 * fy[1:-1:2].sum() + 2 * fy[2:-1:2].sum())
        assert nl.F(0, np.array(b)) - nl.F(0, np.array(a)) == pytest.approx(simpson, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("nl", [EXPO, CUBIC, builtin_nonlinearity("power_p", p=1.7)], ids=lambda n: n.name)
def test_derivative_matches_central_difference(nl):
    # even point count keeps y = 0 (where |y|^(p-1) has a cusp for p < 2) off the grid
    y = np.linspace(-1.5, 1.5, 30)
    eps = 1e-6
    fd = (nl.f(0, y + eps) - nl.f(0, y - eps)) / (2 * eps)
    np.testing.assert_allclose(nl.df(0, y), fd, rtol=1e-6, atol=1e-8)


def test_cubic_and_power():
    assert CUBIC.alpha == 4
    np.testing.assert_allclose(CUBIC.f(0, np.array([-2.0, 0.5])), [-8, 0.125])
    np.testing.assert_allclose(CUBIC.F(0, np.array([-2.0])), [4.0])
    p = builtin_nonlinearity("power_p", p=5)
    assert p.alpha == 6
    with pytest.raises(InvalidParam):
        builtin_nonlinearity("power_p", p=1)
    with pytest.raises(InvalidParam):
        builtin_nonlinearity("power_p")
    with pytest.raises(UnknownName):
        builtin_nonlinearity("quintic")


def test_hypotheses_cubic():
    rep = check_hypotheses(CUBIC, 1.0, M=2, grid_n=100)
    assert rep["ok"] and rep["F4_sup"] <= 1e-6
    assert rep["C_M"] == pytest.approx(8.0)


def test_hypotheses_paper_example():
    rep = check_hypotheses(EXPO, 1.0, M=2, grid_n=400)
    assert rep["F3"] and rep["ok"]


def test_linear_fails_f4():
    lam = 1.3
    lin = Nonlinearity("linear", lambda x, y: lam * np.asarray(y), lambda x, y: lam * np.asarray(y) ** 2 / 2, 2.0)
    rep = check_hypotheses(lin, lam, M=2, grid_n=100)
    assert not rep["F4"] and not rep["F5"] and not rep["ok"]


def test_hypotheses_arguments():
    with pytest.raises(InvalidParam):
        check_hypotheses(CUBIC, 1.0, M=0)
    with pytest.raises(InvalidParam):
        check_hypotheses(CUBIC, 1.0, grid_n=10)


def test_branch_restricted_check():
    # a nonlinearity that is bad only for y < 0 passes on the positive branch
    def f(x, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= 0, y**3, 0.0)

    def F(x, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= 0, y**4 / 4, 0.0)

    nl = Nonlinearity("half", f, F, 4.0)
    assert check_hypotheses(nl, 1.0, branch="positive")["ok"]
    assert not check_hypotheses(nl, 1.0, branch="negative")["ok"]


@settings(max_examples=50, deadline=None)
@given(st.floats(1.05, 6.0))
def test_power_family_satisfies_grid_hypotheses(p):
    rep = check_hypotheses(builtin_nonlinearity("power_p", p=p), 0.5, M=3, grid_n=200)
    assert rep["F1"] and rep["F3"] and rep["F5"]

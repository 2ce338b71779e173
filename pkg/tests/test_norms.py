import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from pnspace.errors import NoConvergence
from pnspace.grid import GridFunction, make_grid
from pnspace.modulars import SpaceSpec, lebesgue_modular, pn_modular, theta_modular
from pnspace.norms import (
    NormResult,
    _PowerSum,
    luxemburg_norm,
    metric_const,
    metric_var,
    pn_pseudonorm,
    sobolev_norm,
    solve_scale,
)
from pnspace.transforms import psi_exponent


def fn(grid, f):
    return GridFunction.from_function(grid, f)


def test_luxemburg_examples(line):
    assert luxemburg_norm(GridFunction.constant(line, 0.0), 2).value == 0.0
    r = luxemburg_norm(GridFunction.constant(line, 3.0), 2)
    assert isinstance(r, NormResult) and r.value == pytest.approx(3.0, rel=1e-12)
    assert r.residual <= 1e-10 and r.bracket[0] <= r.value <= r.bracket[1]


def test_luxemburg_variable_exponent_against_scan_oracle():
    g = make_grid(1, [0, 1], 4001)
    got = luxemburg_norm(GridFunction.constant(g, 2.0), "2 + x").value

    def F(lam):
        return quad(lambda x: (2 / lam) ** (2 + x), 0, 1, epsabs=1e-14)[0] - 1

    assert got == pytest.approx(brentq(F, 1, 4, xtol=1e-14), rel=1e-8)


def test_solver_budget_exhaustion_raises():
    F = _PowerSum(np.array([2.0, 3.0]), np.array([1.0, 5.0]))
    with pytest.raises(NoConvergence):
        solve_scale(F, tol=1e-15, max_iter=5)


def test_pn_closed_form_and_monotone():
    g = make_grid(1, [0, 1], 2001)
    u = fn(g, lambda x: x)
    assert pn_pseudonorm(GridFunction.constant(g, 0.0), SpaceSpec.var(1, 1)).value == 0.0
    r = pn_pseudonorm(u, SpaceSpec.var(1, 1))
    assert r.value == pytest.approx(math.sqrt(5 / 6), rel=1e-6)
    closed = pn_pseudonorm(u, SpaceSpec.const(1, 1, 1))
    assert closed.form == "closed" and closed.value == pytest.approx(r.value, rel=1e-10)
    for spec in (SpaceSpec.var(1, 1), SpaceSpec.var("x", "1 + x"),
                 SpaceSpec.var_theta(1, 1, 3)):
        assert pn_pseudonorm(u * 2, spec).value >= pn_pseudonorm(u, spec).value


def test_theta_forms_are_labelled(line):
    u = fn(line, lambda x: 1 + x)
    spec = SpaceSpec.var_theta(1, 1, "3 + x")
    s = pn_pseudonorm(u, spec)
    i = pn_pseudonorm(u, spec, form="inf")
    assert (s.form, i.form) == ("sum", "inf")
    expect = pn_pseudonorm(u, SpaceSpec.var(1, 1)).value + luxemburg_norm(u, "3 + x").value
    assert s.value == pytest.approx(expect, rel=1e-12)
    assert theta_modular(u * (1 / i.value), 1, 1, "3 + x") == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        pn_pseudonorm(u, spec, form="max")


def test_sobolev_examples():
    g = make_grid(1, [0, 1], 4001)
    assert sobolev_norm(fn(g, lambda x: x), 2) == pytest.approx(1 / math.sqrt(3) + 1, rel=1e-6)
    assert sobolev_norm(GridFunction.constant(g, 0.0), 2) == 0.0
    g2 = make_grid(1, [0, 2], 101)
    assert sobolev_norm(GridFunction.constant(g2, -3.0), 3) == pytest.approx(3 * 2 ** (1 / 3))


def test_metric_const_basics(line, rng):
    u = GridFunction(line, np.sin(3 * line.axes[0]))
    v = GridFunction(line, np.cos(2 * line.axes[0]))
    assert metric_const(u, u, 1, 2) == 0.0
    assert metric_const(u, v, 1, 2) == pytest.approx(metric_const(v, u, 1, 2), rel=1e-12)
    assert metric_const(u, v, 0, 2) == pytest.approx(sobolev_norm(u - v, 2), rel=1e-9)


def test_metric_var_agrees_with_const_in_1d(line, rng):
    for _ in range(5):
        a, b = rng.normal(size=2)
        u = fn(line, lambda x: a * np.sin(2 * x) + 0.3)
        v = fn(line, lambda x: b * x ** 2 - 0.2)
        alpha, beta = 1.5, 2.0
        psi = psi_exponent(alpha + beta, alpha, beta)
        assert psi == pytest.approx(beta)
        assert metric_var(u, v, alpha, beta, psi) == pytest.approx(
            metric_const(u, v, alpha, beta), rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-20, 20).filter(lambda c: abs(c) > 1e-3))
def test_luxemburg_homogeneous(seed, c):
    g = make_grid(1, [0, 1], 65)
    u = GridFunction(g, np.random.default_rng(seed).normal(size=g.shape))
    assert luxemburg_norm(u * c, "1 + x^2").value == pytest.approx(
        abs(c) * luxemburg_norm(u, "1 + x^2").value, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_luxemburg_sandwich(seed):
    g = make_grid(1, [0, 1], 65)
    r = np.random.default_rng(seed)
    u = GridFunction(g, r.normal(size=g.shape) * 10.0 ** r.uniform(-2, 2))
    p = GridFunction(g, 1 + 3 * r.uniform(size=g.shape))
    lam = luxemburg_norm(u, p).value
    s = lebesgue_modular(u, p)
    lo, hi = p.values.min(), p.values.max()
    assert min(lam ** lo, lam ** hi) * (1 - 1e-6) <= s <= max(lam ** lo, lam ** hi) * (1 + 1e-6)


def test_zero_threshold(line):
    tiny = GridFunction.constant(line, 1e-160)
    assert luxemburg_norm(tiny, 2).value == 0.0
    assert pn_modular(tiny, SpaceSpec.const(1, 1, 1)) < 1e-300

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnspace.errors import ConditionViolated
from pnspace.grid import GridFunction, boundary_trace, diff, enforce_vanishing_boundary, make_grid
from pnspace.transforms import (
    PhiMap,
    chain_rule_residual,
    decomposition_residual,
    g_apply,
    g_inverse,
    g_prime,
    g_second,
    interior_max,
    phi_apply,
    phi_inverse,
    phi_prime,
    psi_exponent,
)

G = make_grid(1, [0, 1], 5)


def const(c):
    return GridFunction.constant(G, c)


def test_g_examples():
    assert g_apply(const(2.0), 2, 1).values[0] == 8.0
    assert g_inverse(const(8.0), 2, 1).values[0] == pytest.approx(2.0, rel=1e-15)
    assert g_apply(const(-3.0), 2, 1).values[0] == -27.0
    assert g_inverse(const(0.0), 2, 1).values[0] == 0.0
    with pytest.raises(ValueError):
        g_apply(const(1.0), 1, 0.5)


def test_g_derivatives_match_finite_differences():
    alpha, beta = 2.0, 1.5
    t = np.linspace(0.2, 2.0, 7)
    h = 1e-5
    g7 = make_grid(1, [0, 1], 7)
    s = GridFunction(g7, t)
    num1 = (g_apply(s + h, alpha, beta).values - g_apply(s - h, alpha, beta).values) / (2 * h)
    np.testing.assert_allclose(g_prime(s, alpha, beta).values, num1, rtol=1e-8)
    num2 = (g_prime(s + h, alpha, beta).values - g_prime(s - h, alpha, beta).values) / (2 * h)
    np.testing.assert_allclose(g_second(s, alpha, beta).values, num2, rtol=1e-7)
    assert g_second(GridFunction.constant(g7, 0.0), alpha, beta).values[0] == 0.0


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 5), st.floats(1, 5))
def test_g_round_trip(seed, alpha, beta):
    g = make_grid(1, [0, 1], 33)
    u = GridFunction(g, np.random.default_rng(seed).normal(size=g.shape) * 3)
    back = g_inverse(g_apply(u, alpha, beta), alpha, beta)
    np.testing.assert_allclose(back.values, u.values, rtol=1e-10, atol=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_phi_round_trip_variable(seed):
    g = make_grid(1, [0, 1], 33)
    u = GridFunction(g, np.random.default_rng(seed).normal(size=g.shape) * 3)
    m = PhiMap("1 + x", "2 - x")
    np.testing.assert_allclose(phi_inverse(phi_apply(u, m), m).values, u.values, rtol=1e-10)


def test_phi_examples():
    m = PhiMap(2, 2)
    assert phi_apply(const(-3.0), m).values[0] == -9.0
    ident = PhiMap(0, 2)
    u = GridFunction(G, [-1, 0, 0.5, 2, 3])
    np.testing.assert_array_equal(phi_apply(u, ident).values, u.values)
    np.testing.assert_array_equal(phi_prime(u, ident).values, 1.0)
    assert phi_prime(const(0.0), m).values[0] == 0.0
    assert phi_apply(const(0.0), m).values[0] == 0.0


def test_phi_strictly_increasing():
    g = make_grid(1, [0, 1], 9)
    m = PhiMap("3*x", "1 + x")
    ts = np.linspace(-3, 3, 61)
    vals = np.array([phi_apply(GridFunction.constant(g, t), m).values for t in ts])
    assert np.all(np.diff(vals, axis=0) > 0)


def test_psi_examples(line):
    assert psi_exponent(4, 2, 2) == 2
    assert psi_exponent(6, 2, 2) == 3
    with pytest.raises(ConditionViolated):
        psi_exponent(3.9, 2, 2)
    with pytest.raises(ConditionViolated):
        psi_exponent("2.9 + x", "1 + x", 2, grid=line)
    f = psi_exponent("3 + x", "x", 2, grid=line)
    np.testing.assert_allclose(f.values, (3 + line.axes[0]) * 2 / (line.axes[0] + 2))
    with pytest.raises(ConditionViolated):
        psi_exponent(5, 2, 2, eps0=2.0)


def test_g_keeps_boundary_vanishing(line, rng):
    u = enforce_vanishing_boundary(GridFunction(line, rng.normal(size=line.shape)))
    assert boundary_trace(g_apply(u, 2, 1.5)).max_abs() == 0.0


def _chain_errors(u_fn, m, sizes):
    out = []
    for n in sizes:
        g = make_grid(1, [0.1, 1.1], n)
        (r,) = chain_rule_residual(GridFunction.from_function(g, u_fn), m)
        out.append(interior_max(r))
    return out


def test_chain_rule_second_order_constant_exponents():
    errs = _chain_errors(lambda x: np.sin(2 * x) + 1.5, PhiMap(1.5, 2), (65, 129, 257))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(4, rel=0.2)


def test_chain_rule_constant_function_variable_exponent():
    errs = _chain_errors(lambda x: 2.0 + 0 * x, PhiMap("1 + x^2", "2 + sin(x)"), (65, 129, 257))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(4, rel=0.2)


def test_chain_rule_unit_function_exact():
    g = make_grid(1, [0, 1], 33)
    (r,) = chain_rule_residual(GridFunction.constant(g, 1.0), PhiMap("x", "1 + x"))
    assert interior_max(r) == 0.0


def test_decomposition_residual_constant_exponents():
    g = make_grid(1, [0.1, 1.1], 257)
    u = GridFunction.from_function(g, lambda x: np.sin(2 * x) + 1.5)
    gamma, beta = 1.5, 2.0
    (r,) = decomposition_residual(u, PhiMap(gamma, beta))
    expect = gamma / beta * np.abs(u.values) ** (gamma / beta) * diff(u).values
    inner = ~g.boundary_mask
    np.testing.assert_allclose(r.values[inner], expect[inner], rtol=1e-3)

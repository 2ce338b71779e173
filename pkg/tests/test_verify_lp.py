import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from pnspace.errors import Infeasible
from pnspace.verify import constraint_margins, fit_constants


def test_examples():
    np.testing.assert_allclose(fit_constants([1.0], [[2.0]]), [0.5])
    np.testing.assert_array_equal(fit_constants([0, 0], [[1, 0], [0, 1]]), [0, 0])
    with pytest.raises(Infeasible) as info:
        fit_constants([0.0, 1.0], [[1.0], [0.0]])
    assert info.value.row == 1


def test_validation():
    with pytest.raises(ValueError):
        fit_constants([1.0], [[-1.0]])
    with pytest.raises(ValueError):
        fit_constants([np.nan], [[1.0]])
    with pytest.raises(ValueError):
        fit_constants([1.0, 2.0], [[1.0]])


def test_negative_lhs_rows_are_free():
    np.testing.assert_array_equal(fit_constants([-5.0, 0.0], [[0.0, 0.0], [1.0, 1.0]]), [0, 0])


def test_tie_break_is_lexicographic():
    # c1 + c2 >= 1 alone: every point on the segment has sum 1
    np.testing.assert_allclose(fit_constants([1.0], [[1.0, 1.0]]), [0.0, 1.0])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 40))
def test_matches_linprog(seed, k, m):
    r = np.random.default_rng(seed)
    A = r.exponential(size=(m, k)) * (r.uniform(size=(m, k)) < 0.8)
    A[:, -1] += 0.01  # keep every row satisfiable
    b = r.normal(size=m) * r.exponential(size=m)
    c = fit_constants(b, A)
    assert np.all(c >= 0)
    assert np.min(constraint_margins(b, A, c)) >= -1e-9 * max(1.0, np.max(np.abs(b)))
    ref = linprog(np.ones(k), A_ub=-A, b_ub=-b, bounds=[(0, None)] * k, method="highs")
    assert ref.status == 0
    assert c.sum() == pytest.approx(ref.fun, rel=1e-7, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_more_rows_never_lower_the_optimum(seed):
    r = np.random.default_rng(seed)
    A = r.exponential(size=(30, 2)) + 0.01
    b = r.exponential(size=30)
    assert fit_constants(b, A).sum() >= fit_constants(b[:15], A[:15]).sum() * (1 - 1e-12)

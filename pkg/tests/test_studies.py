import json
import math

import numpy as np
import pytest

from pnspace.errors import FitAmbiguous, HypothesisViolated
from pnspace.grid import integrate, make_grid
from pnspace.modulars import SpaceSpec
from pnspace.studies import (
    DEFAULT_CUTOFFS,
    GrowthFit,
    _select,
    check_1d_identities,
    counterexample_nonlinearity,
    default_density,
    fit_growth,
    refine_study,
)

A = np.array(DEFAULT_CUTOFFS)


def test_fit_growth_exact_log():
    fits = fit_growth(A, 3.0 + 0.7 * np.log(1 / A))
    assert fits["log"].params["C"] == pytest.approx(0.7, rel=1e-8)
    assert min(fits, key=lambda k: fits[k].bic) == "log"
    assert fits["log"].growth == pytest.approx(0.7 * math.log(2 ** 10), rel=1e-8)


def test_fit_growth_convergent_power_tail():
    fits = fit_growth(A, 2.0 - 2.0 * np.sqrt(A))
    c = fits["constant"]
    assert c.params["c0"] == pytest.approx(2.0, rel=1e-8)
    model, cls, _ = _select(fits, 2.0 - 2.0 * np.sqrt(A))
    assert (model, cls) == ("constant", "convergent")


def test_fit_growth_power_divergence():
    y = 1.0 + 0.5 * A ** -0.5
    fits = fit_growth(A, y)
    assert fits["power"].params["sigma"] == pytest.approx(0.5, rel=1e-3)
    assert _select(fits, y)[:2] == ("power", "divergent")


def test_few_points_use_one_correction():
    a = A[:6]
    fits = fit_growth(a, 1.0 + a)
    assert "s2" not in fits["constant"].params
    assert fits["constant"].params["c0"] == pytest.approx(1.0, rel=1e-8)


def test_select_ambiguous():
    fits = {
        "constant": GrowthFit("constant", {}, 1.0, 10.0, 0.0),
        "log": GrowthFit("log", {}, 1e-3, -5.0, 3.0),
        "power": GrowthFit("power", {}, 1.005e-3, -4.9, 3.0),
    }
    with pytest.raises(FitAmbiguous):
        _select(fits, np.ones(11))


def test_select_demotes_unresolved_growth():
    fits = {
        "constant": GrowthFit("constant", {}, 1e-6, 0.0, 0.0),
        "log": GrowthFit("log", {}, 1e-8, -1.0, 1e-5),
        "power": GrowthFit("power", {}, 1.0, 5.0, 1e-5),
    }
    model, cls, notes = _select(fits, np.ones(11), noise=1e-4)
    assert (model, cls) == ("constant", "convergent") and notes


def _integral_study(expr, **kw):
    return refine_study(expr, None, DEFAULT_CUTOFFS, functional=lambda u: integrate(u), **kw)


def test_refine_reciprocal_diverges_logarithmically():
    st = _integral_study("1 / x")
    assert st.classification == "divergent" and st.model == "log"
    assert st.fits["log"].params["C"] == pytest.approx(1.0, rel=0.05)


def test_refine_inverse_sqrt_converges():
    st = _integral_study("x ^ -0.5")
    assert st.classification == "convergent"
    assert st.fits["constant"].params["c0"] == pytest.approx(2.0, rel=1e-3)


def test_refine_constant_function():
    st = refine_study("1", SpaceSpec.const(1, 1, 2), DEFAULT_CUTOFFS[:6])
    assert st.classification == "convergent"
    assert st.values[-1] == pytest.approx(1.0 - DEFAULT_CUTOFFS[5], rel=1e-12)


def test_refine_validation():
    f = dict(functional=integrate)
    with pytest.raises(ValueError, match="at least"):
        refine_study("1", None, [0.5, 0.25], **f)
    with pytest.raises(ValueError, match="decreasing"):
        refine_study("1", None, [0.5, 0.25, 0.25, 0.1, 0.05], **f)
    with pytest.raises(ValueError, match="upper"):
        refine_study("1", None, [2.0, 0.5, 0.25, 0.1, 0.05], **f)
    with pytest.raises(ValueError, match="spec"):
        refine_study("1", None, DEFAULT_CUTOFFS)
    with pytest.raises(ValueError, match="finite"):
        refine_study("1", None, DEFAULT_CUTOFFS[:5], functional=lambda u: math.inf)


def test_study_outputs(tmp_path):
    st = refine_study("x", SpaceSpec.const(1, 1, 2), DEFAULT_CUTOFFS[:5], density=512)
    assert st.nodes[0] == math.ceil(512 * (1 - 2 ** -4)) + 1
    d = json.loads(st.to_json())
    assert d["classification"] == st.classification and set(d["fits"]) == {
        "constant", "log", "power"}
    path = tmp_path / "s.csv"
    text = st.to_csv(path)
    assert path.read_text() == text
    rows = text.strip().split("\n")
    assert rows[0] == "cutoff,value" and len(rows) == 6
    assert float(rows[-1].split(",")[1]) == st.values[-1]


def test_default_density():
    assert default_density([0.1, 0.01]) == 6400
    assert default_density([0.5]) == 4096


def test_counterexample_base_case():
    rep = counterexample_nonlinearity(2, 0.5, 1)
    assert rep.passed
    assert rep.slope_relative_error < 0.05
    assert {k: s.classification for k, s in rep.studies.items()} == rep.expected
    assert json.loads(rep.to_json())["pass"] is True


@pytest.mark.parametrize("args", [(2, 0.9, 1), (2, 0.3, 1), (1, 0.0, 1), (2, 0.5, 0)])
def test_counterexample_rejects(args):
    with pytest.raises(HypothesisViolated):
        counterexample_nonlinearity(*args)


@pytest.mark.slow
@pytest.mark.parametrize("beta", [1.5, 3.0])
def test_counterexample_upper_edge(beta):
    rep = counterexample_nonlinearity(beta, (beta - 1) / beta, 1)
    assert rep.passed and rep.slope_relative_error < 0.05


@pytest.mark.parametrize("expr", ["x*(1-x)", "0.7", "sin(3*x) + 2"])
def test_identities(expr):
    rep = check_1d_identities(expr, 2, 2, make_grid(1, [0, 1], 257))
    assert rep.passed, rep.to_json()
    assert all(t["relative_error"] <= 1e-12 for t in rep.identity["terms"].values())


def test_identities_hypotheses():
    g = make_grid(1, [0, 1], 65)
    with pytest.raises(HypothesisViolated):
        check_1d_identities("x", 0.5, 2, g)
    with pytest.raises(HypothesisViolated):
        check_1d_identities("x", 1, 1, g)
    with pytest.raises(ValueError):
        check_1d_identities("x", 2, 2, make_grid(2, [0, 1, 0, 1], 9))

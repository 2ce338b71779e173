"""Acceptance criteria; each test prints one ``PASS``/``FAIL`` line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""

import io
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from pnspace.cli import main
from pnspace.grid import GridFunction, diff, make_grid
from pnspace.modulars import SpaceSpec, pn_modular
from pnspace.norms import luxemburg_norm, pn_pseudonorm
from pnspace.studies import counterexample_nonlinearity
from pnspace.transforms import (
    PhiMap,
    chain_rule_residual,
    g_apply,
    g_inverse,
    interior_max,
    phi_apply,
    phi_inverse,
)
from pnspace.verify import (
    FunctionFamily,
    admissible_theorem_3_1,
    admissible_theorem_3_2,
    check_embedding_3_1,
    check_embedding_3_2,
    check_holder_var,
    check_homeomorphism_sequences,
    check_lambda_sandwich,
    check_lemma_2_1,
    check_lemma_2_2,
    check_lemma_2_3,
    check_lemma_4_1,
    check_lemma_4_2,
    check_lemma_4_3,
    check_lemma_4_4,
    check_luxemburg_sandwich,
    check_metric_axioms,
    scalar_N0,
)
from pnspace.errors import HypothesisViolated

LINE = make_grid(1, [0, 1], 257)
SQUARE = make_grid(2, [0, 1, 0, 1], 65)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail
    return emit


def test_criterion_01_prescribed_constants(report):
    t0 = time.perf_counter()
    worst = {}
    for grid in (LINE, SQUARE):
        fam = FunctionFamily(grid, "trig", seed=0, count=100)
        g = f"{grid.dim}d"
        worst[f"4.1/{g}"] = check_lemma_4_1(fam, "2 + 0.5*x", "1 + 0.5*x").worst_margin
        worst[f"holder/{g}"] = check_holder_var(fam, "2 + x").worst_margin
        worst[f"4.4/{g}"] = check_lemma_4_4(fam, 1, 2, 4, 0.5, 1, 3).worst_margin
    dt = time.perf_counter() - t0
    low = min(worst.values())
    ok = low >= -1e-8 and dt < 30
    report(1, ok, f"worst margin {low:.3e} over {sorted(worst)}, {dt:.1f} s")


def test_criterion_02_infimum_solver(report):
    t0 = time.perf_counter()
    r = np.random.default_rng(2)
    worst = math.inf
    for i in range(50):
        grid = LINE if i % 2 == 0 else SQUARE
        fam = FunctionFamily(grid, ("trig", "poly", "bump")[i % 3], seed=i, count=1)
        a, b, w = r.uniform(1.1, 2.5), r.uniform(0.2, 1.5), r.uniform(1, 6)
        p = f"{a:.6f} + {b:.6f}*sin({w:.6f}*x)^2"
        worst = min(worst, check_luxemburg_sandwich(fam, p).details["worst_relative_margin"])
        g, be = f"{b:.6f} + 0.3*x", f"{a:.6f} + 0.2*x"
        th = f"{a + b + 0.5 + r.uniform(0, 2):.6f} + x"
        worst = min(worst, check_lambda_sandwich(fam, g, be, th).details["worst_relative_margin"])
    closed = 0.0
    for c, p, grid in ((3.0, 2.0, LINE), (-0.4, 3.5, SQUARE), (7.0, 1.0, make_grid(1, [0, 2.5], 65))):
        got = luxemburg_norm(GridFunction.constant(grid, c), p).value
        closed = max(closed, abs(got - abs(c) * grid.measure ** (1 / p)) / abs(c))
    for gm, be, grid in ((1.0, 1.0, LINE), (0.5, 2.0, SQUARE)):
        u = FunctionFamily(grid, "trig", seed=4, count=1).member(0)
        M = pn_modular(u, SpaceSpec.var(gm, be))
        got = pn_pseudonorm(u, SpaceSpec.var(gm, be)).value
        closed = max(closed, abs(got - M ** (1 / (gm + be))) / M ** (1 / (gm + be)))
    dt = time.perf_counter() - t0
    ok = worst >= -1e-6 and closed <= 1e-8 and dt < 10
    report(2, ok, f"worst sandwich margin {worst:.3e}, closed-form error {closed:.1e}, {dt:.1f} s")


def test_criterion_03_counterexample(report):
    t0 = time.perf_counter()
    rep = counterexample_nonlinearity(2, 0.5, 1)
    dt = time.perf_counter() - t0
    d0 = rep.studies["u0"].final_relative_difference
    d1 = rep.studies["u1"].final_relative_difference
    cls = {k: s.classification for k, s in rep.studies.items()}
    ok = (rep.slope_relative_error < 0.05 and rep.passed and d0 < 1e-3 and d1 < 1e-3
          and dt < 60)
    report(3, ok, f"slope {rep.log_slope:.5f} vs 0.25 (rel err {rep.slope_relative_error:.1e}), "
                  f"classes {cls}, final-two rel diff u0 {d0:.1e} u1 {d1:.1e}, "
                  f"cutoffs 2^-4..2^-14, {dt:.1f} s")


def test_criterion_04_identities(report):
    r = np.random.default_rng(4)
    ident, trip = 0.0, 0.0
    for i in range(40):
        grid = LINE if i % 2 == 0 else SQUARE
        u = FunctionFamily(grid, ("trig", "poly", "bump")[i % 3], seed=i, count=1).member(0)
        beta = r.uniform(1.05, 4)
        alpha = r.uniform(beta - 1, beta + 3) + 1e-3
        gu = g_apply(u, alpha, beta)
        for v in (gu, diff(gu)):
            lhs = float(np.sum(grid.weights * np.abs(v.values) ** beta))
            rhs = float(np.sum(grid.weights * np.abs(g_inverse(v, alpha, beta).values)
                               ** (alpha + beta)))
            ident = max(ident, abs(lhs - rhs) / max(lhs, rhs, 1e-300))
        back = g_inverse(gu, alpha, beta).values
        trip = max(trip, np.max(np.abs(back - u.values) / np.maximum(1, np.abs(u.values))))
        m = PhiMap(f"{r.uniform(0, 2):.4f} + 0.5*x", f"{r.uniform(1, 3):.4f} + 0.5*x")
        back = phi_inverse(phi_apply(u, m), m).values
        trip = max(trip, np.max(np.abs(back - u.values) / np.maximum(1, np.abs(u.values))))
        fwd = phi_apply(phi_inverse(u, m), m).values
        trip = max(trip, np.max(np.abs(fwd - u.values) / np.maximum(1, np.abs(u.values))))
    ok = ident <= 1e-12 and trip <= 1e-10
    report(4, ok, f"identity rel err {ident:.1e}, roundtrip err {trip:.1e} over 40 functions")


def test_criterion_05_chain_rule(report):
    ratios = []
    m = PhiMap("1 + x^2", "2 + sin(x)")
    errs = []
    for n in (65, 129, 257, 513):
        g = make_grid(1, [0.1, 1.1], n)
        (res,) = chain_rule_residual(GridFunction.from_function(g, lambda x: np.sin(2 * x) + 1.5), m)
        errs.append(interior_max(res))
    ratios += [a / b for a, b in zip(errs, errs[1:])]
    m2 = PhiMap("0.5 + 0.3*x*y", "1.5 + 0.2*(x + y)")
    errs = []
    for n in (17, 33, 65, 129):
        g = make_grid(2, [0.1, 1.1, 0.1, 1.1], n)
        u = GridFunction.from_function(g, lambda x, y: 1.5 + np.sin(x) * np.cos(y))
        errs.append(max(interior_max(r) for r in chain_rule_residual(u, m2)))
    ratios += [a / b for a, b in zip(errs, errs[1:])]
    ok = all(abs(q - 4) <= 0.8 for q in ratios)
    report(5, ok, "residual ratios per halving " + ", ".join(f"{q:.3f}" for q in ratios))


def test_criterion_06_admissibility(report):
    got = {
        "(1,1,2)": admissible_theorem_3_1(1, 1, 2),
        "beta=n=2": admissible_theorem_3_1(1, 2, 2),
        "(1,2,4)": admissible_theorem_3_2(1, 2, 4),
    }
    ok = got["(1,1,2)"].threshold == 4 / 3 and got["(1,1,2)"].relation == ">="
    ok &= got["beta=n=2"].relation == ">" and not got["beta=n=2"].admits(2.0)
    ok &= got["beta=n=2"].admits(2.0 + 1e-9)
    ok &= got["(1,2,4)"].threshold == 48 / 13
    rejected = 0
    for fn, args in ((admissible_theorem_3_1, (1, 0.5, 2)), (admissible_theorem_3_1, (-1, 2, 2)),
                     (admissible_theorem_3_2, (2, 2, 2)), (admissible_theorem_3_2, (1, 1.5, 2))):
        try:
            fn(*args)
        except HypothesisViolated:
            rejected += 1
    ok = bool(ok and rejected == 4)
    report(6, ok, ", ".join(f"{k} -> {d.relation} {d.threshold!r}" for k, d in got.items())
           + f", {rejected}/4 violations rejected")


def test_criterion_07_scalar_N0(report):
    t = np.exp(np.linspace(-40, 10, 4_000_001))
    worst = 0.0
    for eps in (0.1, 0.2, 1 / math.e, 0.5, 1.0, 2.0):
        brute = max(1.0, float(np.max(np.log(t) * t ** -eps)))
        worst = max(worst, abs(scalar_N0(eps) - brute) / brute)
    report(7, worst <= 1e-6, f"max rel diff vs brute force {worst:.1e}")


STABILITY = {
    "2.1": lambda f: check_lemma_2_1(f, 1, 2),
    "2.2": lambda f: check_lemma_2_2(f, 2, 2, 1, 1),
    "2.3": lambda f: check_lemma_2_3(f, 1, 1, 1),
    "4.2": lambda f: check_lemma_4_2(f, 1, 1, 1),
    "4.3": lambda f: check_lemma_4_3(f, "1 + x", "1 + 0.5*x", "0.5"),
    "3.1": lambda f: check_embedding_3_1(f, 1, 1, 2),
    "3.2": lambda f: check_embedding_3_2(f, 1, 2, 2),
}


def test_criterion_08_stability(report):
    changes, bad = {}, []
    for name, fn in STABILITY.items():
        fam = FunctionFamily(LINE, "trig", seed=0, count=100, vanishing=name.startswith("3."))
        rep = fn(fam)
        changes[name] = max(rep.extra["relative_change"], default=0.0)
        if not (rep.extra["finite"] and rep.extra["stable"] and rep.passed):
            bad.append(name)
    detail = ", ".join(f"{k} {v:.2f}" for k, v in changes.items())
    report(8, not bad, f"max relative change 100->200 (trig seed 0): {detail}"
           + (f"; unstable {bad}" if bad else ""))


def test_criterion_09_metric(report):
    spec = SpaceSpec.var_theta("0.5 + x", "1.5 + 0.5*x", "4 + x")
    rep = check_metric_axioms(FunctionFamily(LINE, "trig", seed=0, count=200), spec)
    u0 = GridFunction.from_function(LINE, lambda x: 0.5 + x)
    homeo = check_homeomorphism_sequences(u0, "sin(pi*x)", SpaceSpec.var_theta(1, 2, 3.5))
    d = homeo.details
    ok = rep.passed and homeo.passed
    report(9, ok, f"{len(rep.details['violations'])} violations over {rep.details['triples']} "
                  f"triples; decay by m=64: a {d['a_final_over_initial']:.2e}, "
                  f"b {d['b_final_over_initial']:.2e} (need < 1e-3)")


CLI_RUNS = [
    ["norm", "--kind", "pn_theta", "--u", "sin(x) + 2", "--gamma", "1", "--beta", "1 + x",
     "--theta", "4"],
    ["norm", "--kind", "metric_var", "--u", "x", "--v", "x^2", "--gamma", "1", "--beta", "2",
     "--theta", "4"],
    ["verify", "--lemma", "2.2", "--alpha", "2", "--beta", "2", "--alpha1", "1", "--beta1", "1",
     "--family", "bump:seed=9:count=30"],
    ["verify", "--lemma", "metric", "--gamma", "1", "--beta", "2", "--theta", "4",
     "--family", "trig:seed=3:count=20", "--n", "2", "--nodes", "17"],
    ["study", "--kind", "identities_1d", "--u", "x*(1-x)", "--alpha", "2", "--beta", "2"],
]


def _cli_bytes(argv):
    out = io.StringIO()
    main(list(argv), stdout=out, stderr=io.StringIO())
    return out.getvalue().encode()


def test_criterion_10_determinism(report):
    same = [_cli_bytes(a) == _cli_bytes(a) and _cli_bytes(a) for a in CLI_RUNS]
    proc = [subprocess.run([sys.executable, "-m", "pnspace.cli", *CLI_RUNS[2]],
                           capture_output=True, check=False).stdout for _ in range(2)]
    ok = all(same) and proc[0] == proc[1] == _cli_bytes(CLI_RUNS[2])
    ok = ok and all(json.loads(_cli_bytes(a)) for a in CLI_RUNS)
    report(10, bool(ok), f"{sum(map(bool, same))}/{len(CLI_RUNS)} configs byte-identical "
                         f"in process, subprocess repeat identical: {proc[0] == proc[1]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

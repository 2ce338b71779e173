"""Inequality and structural checks over seeded function families.

Two styles of check:

* prescribed constants: the inequality carries explicit constants and every
  sample must satisfy it up to a small tolerance;
* fitted constants: the smallest-sum nonnegative constants are fitted on the
  family and again on the doubled family; the check passes when both fits
  are feasible, finite and agree to within 20% per constant.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ..errors import ConditionViolated, ConjugacyViolated, HypothesisViolated, NotAdmissible
from ..grid import GridFunction, boundary_trace, diff, diff2, integrate, integrate_boundary
from ..modulars import (
    ExponentSource,
    SpaceSpec,
    abs_pow,
    boundary_pn_modular,
    lebesgue_modular,
    log_modular,
    pn_modular,
    resolve_field,
    theta_modular,
)
from ..norms import luxemburg_norm, metric_var, pn_pseudonorm, sobolev_norm
from ..transforms import PhiMap, phi_apply, psi_exponent
from .. import exprlang
from .admissibility import admissible_theorem_3_1, admissible_theorem_3_2
from .families import FunctionFamily
from .lp import fit_constants
from .report import InequalityReport, StructuralReport

__all__ = [
    "STABILITY_LIMIT",
    "relative_change",
    "scalar_N0",
    "check_lemma_2_1",
    "check_lemma_2_2",
    "check_lemma_2_3",
    "check_holder_var",
    "check_luxemburg_sandwich",
    "check_lambda_sandwich",
    "check_lemma_4_1",
    "check_lemma_4_2",
    "check_lemma_4_3",
    "check_lemma_4_4",
    "check_theorem_2_7",
    "check_embedding_3_1",
    "check_embedding_3_2",
    "check_metric_axioms",
    "check_homeomorphism_sequences",
]

STABILITY_LIMIT = 0.2
PRESCRIBED_TOL = 1e-8
FIT_TOL = 1e-9

Row = tuple  # (axis or None, lhs, terms)


# --- shared machinery ----------------------------------------------------------


def _info(family: FunctionFamily) -> dict:
    return {**family.grid.describe(), "family": family.describe()}


def _integral(u: GridFunction, values: np.ndarray) -> float:
    return integrate(GridFunction(u.grid, values))


def _boundary_integral(u: GridFunction, values: np.ndarray) -> float:
    return integrate_boundary(boundary_trace(GridFunction(u.grid, values)))


def _sample(i: int, axis, lhs: float, terms: Sequence[float], constants) -> dict:
    rhs = float(np.dot(terms, constants))
    return {
        "index": i,
        "axis": axis,
        "lhs": float(lhs),
        "terms": [float(t) for t in terms],
        "rhs": rhs,
        "margin": rhs - float(lhs),
    }


def _rows(members: Iterable[GridFunction], row_fn) -> list[tuple]:
    out = []
    for i, u in enumerate(members):
        for axis, lhs, terms in row_fn(u):
            out.append((i, axis, float(lhs), [float(t) for t in terms]))
    return out


def relative_change(c_small, c_big) -> list[float]:
    """Per-constant ``|c2 - c1| / max(|c1|, |c2|)``; 0 where both are (numerically) zero."""
    c1, c2 = np.asarray(c_small, float), np.asarray(c_big, float)
    scale = max(1e-300, float(np.max(np.abs(np.concatenate([c1, c2])))))
    out = []
    for a, b in zip(c1, c2):
        den = max(abs(a), abs(b))
        out.append(0.0 if den <= 1e-12 * scale else float(abs(b - a) / den))
    return out


def _prescribed(lemma, family, rows, constants, labels, notes=(), extra=None,
                tol=PRESCRIBED_TOL) -> InequalityReport:
    samples = [_sample(i, ax, lhs, t, constants) for i, ax, lhs, t in rows]
    worst = min(s["margin"] for s in samples) if samples else 0.0
    return InequalityReport(
        lemma=lemma,
        seed=family.seed,
        grid=_info(family),
        constants=[float(c) for c in constants],
        term_labels=list(labels),
        samples=samples,
        worst_margin=float(worst),
        passed=bool(worst >= -tol),
        tolerance=tol,
        constant_kind="prescribed",
        notes=list(notes),
        extra=dict(extra or {}),
    )


def _fitted(lemma, family, row_fn, labels, notes=(), extra=None) -> InequalityReport:
    """Fit on ``family`` and on its doubling; report the base fit."""
    n = family.count
    big = family.doubled()
    rows = _rows(big.members(), row_fn)
    base = [r for r in rows if r[0] < n]
    lhs1 = np.array([r[2] for r in base])
    T1 = np.array([r[3] for r in base])
    c1 = fit_constants(lhs1, T1)
    c2 = fit_constants(np.array([r[2] for r in rows]), np.array([r[3] for r in rows]))
    change = relative_change(c1, c2)
    finite = bool(np.all(np.isfinite(c1)) and np.all(np.isfinite(c2)))
    stable = bool(max(change, default=0.0) < STABILITY_LIMIT)
    samples = [_sample(i, ax, lhs, t, c1) for i, ax, lhs, t in base]
    worst = min(s["margin"] for s in samples) if samples else 0.0
    tol = FIT_TOL * max(1.0, float(np.max(np.abs(lhs1), initial=0.0)))
    info = {
        "constants_doubled": [float(c) for c in c2],
        "relative_change": change,
        "stable": stable,
        "finite": finite,
        "family_sizes": [n, big.count],
    }
    info.update(extra or {})
    return InequalityReport(
        lemma=lemma,
        seed=family.seed,
        grid=_info(family),
        constants=[float(c) for c in c1],
        term_labels=list(labels),
        samples=samples,
        worst_margin=float(worst),
        passed=bool(finite and stable and worst >= -tol),
        tolerance=tol,
        constant_kind="fitted",
        notes=list(notes),
        extra=info,
    )


def _field(value: ExponentSource, family: FunctionFamily, floor: float) -> np.ndarray:
    return resolve_field(value, family.grid, floor).values


# --- constant-exponent trace-type inequalities ----------------------------------


def check_lemma_2_1(family: FunctionFamily, alpha: float, beta: float) -> InequalityReport:
    """``int |u|^(a+b) <= C1 int |u|^a |D_i u|^b + C2 int_bdry |u|^(a+b)``, each axis."""
    if not (alpha >= 0 and beta >= 1):
        raise HypothesisViolated(f"need alpha >= 0 and beta >= 1, got alpha={alpha}, beta={beta}")

    def rows(u):
        v = u.values
        lhs = _integral(u, abs_pow(v, alpha + beta))
        bdry = boundary_pn_modular(u, alpha + beta)
        for i in range(u.grid.dim):
            du = diff(u, i).values
            yield i, lhs, [_integral(u, abs_pow(v, alpha) * abs_pow(du, beta)), bdry]

    return _fitted("2.1", family, rows, ["mixed_axis", "boundary"],
                   extra={"alpha": alpha, "beta": beta})


def check_lemma_2_2(family: FunctionFamily, alpha: float, beta: float,
                    alpha1: float, beta1: float) -> InequalityReport:
    """``int |u|^a1 |D_i u|^b1 <= C3 int |u|^a |D_i u|^b + C4 int_bdry |u|^(a+b) + C5``."""
    bad = []
    if not (alpha >= 0 and alpha1 >= 0):
        bad.append("alpha, alpha1 >= 0")
    if not beta >= 1:
        bad.append("beta >= 1")
    if not beta > beta1:
        bad.append("beta > beta1")
    if not beta1 > 0:
        bad.append("beta1 > 0")
    if beta1 > 0 and not alpha1 / beta1 >= alpha / beta - 1e-15:
        bad.append("alpha1/beta1 >= alpha/beta")
    if not alpha1 + beta1 <= alpha + beta + 1e-15:
        bad.append("alpha1 + beta1 <= alpha + beta")
    if bad:
        raise HypothesisViolated(
            f"exponents (alpha={alpha}, beta={beta}, alpha1={alpha1}, beta1={beta1}) "
            f"violate: {', '.join(bad)}"
        )

    def rows(u):
        v = u.values
        bdry = boundary_pn_modular(u, alpha + beta)
        for i in range(u.grid.dim):
            du = diff(u, i).values
            lhs = _integral(u, abs_pow(v, alpha1) * abs_pow(du, beta1))
            mixed = _integral(u, abs_pow(v, alpha) * abs_pow(du, beta))
            yield i, lhs, [mixed, bdry, 1.0]

    return _fitted("2.2", family, rows, ["mixed_axis", "boundary", "one"],
                   extra={"alpha": alpha, "beta": beta, "alpha1": alpha1, "beta1": beta1})


def check_lemma_2_3(family: FunctionFamily, alpha: float, beta0: float,
                    beta1: float) -> InequalityReport:
    """``int |u|^a |D_i u|^(b0+b1) <= C6 int |u|^(a+b0) |D_i^2 u|^b1 + C7 int_bdry (...)``.

    The boundary term is ``|u|^(a+b0+b1) + |u|^(a+1) |D_i u|^(b0+b1-1)``.
    """
    bad = []
    if not alpha >= 0:
        bad.append("alpha >= 0")
    if not beta0 + beta1 >= 2:
        bad.append("beta0 + beta1 >= 2")
    if not beta1 >= beta0 >= 0:
        bad.append("beta1 >= beta0 >= 0")
    if bad:
        raise HypothesisViolated(
            f"exponents (alpha={alpha}, beta0={beta0}, beta1={beta1}) violate: {', '.join(bad)}"
        )
    s = beta0 + beta1

    def rows(u):
        v = u.values
        for i in range(u.grid.dim):
            du = diff(u, i).values
            d2u = diff2(u, i).values
            lhs = _integral(u, abs_pow(v, alpha) * abs_pow(du, s))
            second = _integral(u, abs_pow(v, alpha + beta0) * abs_pow(d2u, beta1))
            bdry = _boundary_integral(u, abs_pow(v, alpha + s) + abs_pow(v, alpha + 1) * abs_pow(du, s - 1))
            yield i, lhs, [second, bdry]

    return _fitted("2.3", family, rows, ["second_derivative", "boundary"],
                   extra={"alpha": alpha, "beta0": beta0, "beta1": beta1})


# --- variable-exponent Lebesgue facts ------------------------------------------


def check_holder_var(family: FunctionFamily, p: ExponentSource,
                     q: ExponentSource | None = None) -> InequalityReport:
    """``int |u v| <= 2 ||u||_p ||v||_q`` on pairs (member i, companion member i)."""
    pv = _field(p, family, 1.0)
    if q is None:
        if np.any(pv <= 1):
            raise ConjugacyViolated("p must exceed 1 for a conjugate exponent to exist")
        qv = pv / (pv - 1.0)
    else:
        qv = _field(q, family, 1.0)
    gap = np.abs(1.0 / pv + 1.0 / qv - 1.0)
    if np.any(gap > 1e-12):
        i = np.unravel_index(np.argmax(gap), gap.shape)
        raise ConjugacyViolated(
            f"1/p + 1/q differs from 1 by {gap[i]:.3e} at node {tuple(int(k) for k in i)}"
        )
    pf = GridFunction(family.grid, pv)
    qf = GridFunction(family.grid, qv)
    other = family.companion()
    rows = []
    for i in range(family.count):
        u, v = family.member(i), other.member(i)
        lhs = _integral(u, np.abs(u.values * v.values))
        prod = luxemburg_norm(u, pf).value * luxemburg_norm(v, qf).value
        rows.append((i, None, lhs, [prod]))
    return _prescribed("holder", family, rows, [2.0], ["norm_product"],
                       notes=["pairs are (member i, companion member i)"])


def check_luxemburg_sandwich(family: FunctionFamily, p: ExponentSource,
                             tol: float = 1e-6) -> StructuralReport:
    """``min(l^p-, l^p+) <= sigma_p(u) <= max(l^p-, l^p+)`` with ``l = ||u||_p``."""
    pf = resolve_field(p, family.grid, 1.0)
    samples, worst = [], math.inf
    for i, u in enumerate(family.members()):
        sigma = lebesgue_modular(u, pf)
        lam = luxemburg_norm(u, pf).value
        lo, hi = sorted((lam**pf.lower, lam**pf.upper))
        rel = min(sigma - lo, hi - sigma) / max(sigma, 1e-300) if sigma > 0 else 0.0
        worst = min(worst, rel)
        samples.append({"index": i, "norm": lam, "modular": sigma, "lower": lo,
                        "upper": hi, "relative_margin": rel})
    return StructuralReport("2.5", family.seed, _info(family), bool(worst >= -tol),
                            {"worst_relative_margin": worst, "tolerance": tol,
                             "p_minus": pf.lower, "p_plus": pf.upper}, samples)


def check_lambda_sandwich(family: FunctionFamily, gamma: ExponentSource, beta: ExponentSource,
                          theta: ExponentSource, tol: float = 1e-6) -> StructuralReport:
    """``min(l^(g-+b-), l^th+) <= R(u) <= max(...)`` with ``l`` the inf-form pseudo-norm."""
    spec = SpaceSpec.var_theta(gamma, beta, theta)
    f = spec.fields(family.grid)
    e_lo = f["gamma"].lower + f["beta"].lower
    e_hi = f["theta"].upper
    samples, worst = [], math.inf
    for i, u in enumerate(family.members()):
        R = theta_modular(u, f["gamma"], f["beta"], f["theta"])
        lam = pn_pseudonorm(u, spec, form="inf").value
        lo, hi = sorted((lam**e_lo, lam**e_hi))
        rel = min(R - lo, hi - R) / max(R, 1e-300) if R > 0 else 0.0
        worst = min(worst, rel)
        samples.append({"index": i, "pseudonorm": lam, "modular": R, "lower": lo,
                        "upper": hi, "relative_margin": rel})
    return StructuralReport("lambda", family.seed, _info(family), bool(worst >= -tol),
                            {"worst_relative_margin": worst, "tolerance": tol,
                             "form": "inf", "exponent_low": e_lo, "exponent_high": e_hi},
                            samples)


def check_lemma_4_1(family: FunctionFamily, alpha: ExponentSource,
                    beta: ExponentSource) -> InequalityReport:
    """``int |u|^beta <= int |u|^alpha + |Omega|`` for ``alpha >= beta``."""
    a = _field(alpha, family, 1.0)
    b = _field(beta, family, 1.0)
    if np.any(a < b):
        i = np.unravel_index(np.argmin(a - b), a.shape)
        raise HypothesisViolated(
            f"alpha < beta at node {tuple(int(k) for k in i)} ({a[i]!r} < {b[i]!r})"
        )
    meas = family.grid.measure
    rows = []
    for i, u in enumerate(family.members()):
        rows.append((i, None, _integral(u, abs_pow(u.values, b)),
                     [_integral(u, abs_pow(u.values, a)), 1.0]))
    return _prescribed("4.1", family, rows, [1.0, meas], ["alpha_modular", "one"])


def scalar_N0(eps: float) -> float:
    """Smallest ``N >= 1`` with ``ln t <= N t^eps`` for all ``t > 0``: ``max(1, 1/(e eps))``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return max(1.0, 1.0 / (math.e * eps))


def check_lemma_4_2(family: FunctionFamily, zeta: ExponentSource, beta: float,
                    eps: float) -> InequalityReport:
    """``int |u|^zeta |ln|u||^beta <= N1 int |u|^(zeta+eps) + N2``.

    Also checks the fitted ``N1`` against the bound
    ``N0(eps/beta)^beta + |Omega| (beta/(e zeta-))^beta`` on the optimal sum,
    obtained from the pointwise estimates on ``|u| >= 1`` and ``|u| < 1``.
    """
    if not beta >= 1:
        raise HypothesisViolated(f"need beta >= 1, got {beta}")
    if not eps > 0:
        raise HypothesisViolated(f"need eps > 0, got {eps}")
    zf = resolve_field(zeta, family.grid, 1.0)
    z = zf.values

    def rows(u):
        yield None, log_modular(u, z, beta), [_integral(u, abs_pow(u.values, z + eps)), 1.0]

    rep = _fitted("4.2", family, rows, ["shifted_modular", "one"],
                  extra={"beta": beta, "eps": eps})
    bound = scalar_N0(eps / beta) ** beta + family.grid.measure * (beta / (math.e * zf.lower)) ** beta
    within = rep.constants[0] <= bound * (1 + 1e-9)
    rep.extra["N1_bound"] = bound
    rep.extra["N1_within_bound"] = bool(within)
    if not within:
        rep.passed = False
        rep.notes.append("fitted N1 exceeds the bound built from N0")
    return rep


def check_lemma_4_3(family: FunctionFamily, xi: ExponentSource, beta: ExponentSource,
                    beta1: ExponentSource) -> InequalityReport:
    """``int |u|^xi |ln|u||^beta(x) <= C1 int |u|^(xi+beta1) + C2`` with ``beta1 >= eps > 0``."""
    x = _field(xi, family, 1.0)
    b = _field(beta, family, 1.0)
    b1 = _field(beta1, family, 0.0)
    if not np.min(b1) > 0:
        raise ConditionViolated(f"beta1 must be bounded below by a positive number (min {np.min(b1)!r})")

    def rows(u):
        yield None, log_modular(u, x, b), [_integral(u, abs_pow(u.values, x + b1)), 1.0]

    return _fitted("4.3", family, rows, ["shifted_modular", "one"],
                   extra={"beta1_min": float(np.min(b1))})


def _lemma_4_4_case(g, b, th, x, a, th1) -> str:
    if not np.all(th1 <= th):
        i = np.unravel_index(np.argmax(th1 - th), th.shape)
        raise ConditionViolated(f"theta1 > theta at node {tuple(int(k) for k in i)}")
    eq = np.abs(x * b - g * a) <= 1e-12 * np.maximum(1.0, np.abs(g * a))
    if np.all(eq) and np.all(b >= a):
        return "i"
    if np.all(x * b > g * a) and np.all(g + b >= x + a) and np.min(b - a) > 0:
        return "ii"
    fails = []
    if not np.all(eq):
        fails.append("xi*beta = gamma*alpha")
    if not np.all(b >= a):
        fails.append("beta >= alpha")
    if not np.all(x * b > g * a):
        fails.append("xi*beta > gamma*alpha")
    if not np.all(g + b >= x + a):
        fails.append("gamma + beta >= xi + alpha")
    if not np.min(b - a) > 0:
        fails.append("beta >= alpha + eps")
    raise ConditionViolated(f"neither condition set holds; failing: {', '.join(fails)}")


def check_lemma_4_4(family: FunctionFamily, gamma, beta, theta, xi, alpha,
                    theta1) -> InequalityReport:
    """``R^{xi,alpha,theta1}(u) <= (n+1) (R^{gamma,beta,theta}(u) + |Omega|)``."""
    g = _field(gamma, family, 0.0)
    b = _field(beta, family, 1.0)
    th = _field(theta, family, 1.0)
    x = _field(xi, family, 0.0)
    a = _field(alpha, family, 1.0)
    th1 = _field(theta1, family, 1.0)
    case = _lemma_4_4_case(g, b, th, x, a, th1)
    n = family.grid.dim
    rows = []
    for i, u in enumerate(family.members()):
        rows.append((i, None, theta_modular(u, x, a, th1), [theta_modular(u, g, b, th), 1.0]))
    return _prescribed("4.4", family, rows, [n + 1.0, (n + 1.0) * family.grid.measure],
                       ["theta_modular", "one"], notes=[f"condition set ({case}) holds"],
                       extra={"case": case})


def check_theorem_2_7(family: FunctionFamily, p, gamma, beta, theta) -> InequalityReport:
    """``R^{gamma,beta,theta}(u) <= C (1 + ||u||_{W^{1,p}})^theta+`` for ``p >= theta``."""
    spec = SpaceSpec.var_theta(gamma, beta, theta)
    f = spec.fields(family.grid)
    pf = resolve_field(p, family.grid, 1.0)
    if np.any(pf.values < f["theta"].values):
        i = np.unravel_index(np.argmin(pf.values - f["theta"].values), pf.values.shape)
        raise ConditionViolated(f"p < theta at node {tuple(int(k) for k in i)}")
    top = f["theta"].upper
    nonfinite = []

    def rows(u):
        R = theta_modular(u, f["gamma"], f["beta"], f["theta"])
        w = sobolev_norm(u, pf)
        if not math.isfinite(R):
            nonfinite.append(R)
        yield None, R, [(1.0 + w) ** top]

    rep = _fitted("2.7", family, rows, ["sobolev_power"], extra={"theta_plus": top})
    rep.extra["all_modulars_finite"] = not nonfinite
    if nonfinite:
        rep.passed = False
    return rep


# --- embeddings of constant-exponent spaces -------------------------------------


def _require_vanishing(family: FunctionFamily, lemma: str) -> None:
    if not family.vanishing:
        raise HypothesisViolated(f"check {lemma} needs a boundary-vanishing family")


def check_embedding_3_1(family: FunctionFamily, alpha: float, beta: float, p: float,
                        allow_inadmissible: bool = False) -> InequalityReport:
    """``[u]^(a+b) <= C ||u||_{W^{1,p}}^p + C'`` on the vanishing space, ``n`` = grid dim."""
    decision = admissible_theorem_3_1(alpha, beta, family.grid.dim, p)
    notes = [decision.describe()]
    if not decision.admissible:
        if not allow_inadmissible:
            raise NotAdmissible(f"p={p} is not admissible: {decision.describe()}")
        notes.append("p is NOT admissible; constants reported, not asserted")
    _require_vanishing(family, "3.1")
    spec = SpaceSpec.const(1, alpha, beta, vanishing=True)

    def rows(u):
        yield None, pn_modular(u, spec), [sobolev_norm(u, p) ** p, 1.0]

    rep = _fitted("3.1", family, rows, ["sobolev_p", "one"], notes=notes,
                  extra={"decision": decision.to_dict()})
    return rep


def check_embedding_3_2(family: FunctionFamily, alpha: float, beta: float, p: float,
                        allow_inadmissible: bool = False) -> InequalityReport:
    """``||D_i u||_p^p <= C [u]^p + C'`` with ``[u] = M^(1/(a+b))`` on the vanishing S2 space.

    The fit against ``[u]^(2 beta)`` is reported under ``extra['alt_form']``.
    """
    decision = admissible_theorem_3_2(alpha, beta, family.grid.dim, p)
    notes = [decision.describe()]
    if not decision.admissible:
        if not allow_inadmissible:
            raise NotAdmissible(f"p={p} is not admissible: {decision.describe()}")
        notes.append("p is NOT admissible; constants reported, not asserted")
    _require_vanishing(family, "3.2")
    spec = SpaceSpec.const(2, alpha, beta, vanishing=True)
    deg = alpha + beta

    def rows_for(power):
        def rows(u):
            M = pn_modular(u, spec)
            for i in range(u.grid.dim):
                yield i, _integral(u, abs_pow(diff(u, i).values, p)), [M ** (power / deg), 1.0]
        return rows

    rep = _fitted("3.2", family, rows_for(p), ["pseudonorm_p", "one"], notes=notes,
                  extra={"decision": decision.to_dict()})
    alt = _fitted("3.2", family, rows_for(2.0 * beta), ["pseudonorm_2beta", "one"])
    rep.extra["alt_form"] = {
        "term_labels": alt.term_labels,
        "constants": alt.constants,
        "constants_doubled": alt.extra["constants_doubled"],
        "stable": alt.extra["stable"],
        "worst_margin": alt.worst_margin,
    }
    return rep


# --- metric structure -----------------------------------------------------------


def _triples(source, count=None):
    if isinstance(source, FunctionFamily):
        a, b, c = source, source.companion(1), source.companion(2)
        return [(a.member(i), b.member(i), c.member(i)) for i in range(source.count)]
    return list(source)


def check_metric_axioms(triples, spec: SpaceSpec, tol: float = 1e-12) -> StructuralReport:
    """Nonnegativity, ``d(u,u) = 0``, symmetry, triangle inequality and identity of
    indiscernibles for ``metric_var`` on each triple.

    ``triples`` is a sequence of ``(u, v, w)`` or a family (member i and the
    i-th members of two companion families).
    """
    ts = _triples(triples)
    if not ts:
        raise ValueError("no triples to check")
    grid = ts[0][0].grid
    f = spec.fields(grid)
    g, b = f["gamma"], f["beta"]
    psi = psi_exponent(f["theta"], g, b)

    def d(x, y):
        return metric_var(x, y, g, b, psi)

    violations = []
    samples = []
    for k, (u, v, w) in enumerate(ts):
        duv, dvu, duw, dvw, duu = d(u, v), d(v, u), d(u, w), d(v, w), d(u, u)
        scale = max(1.0, duv, duw, dvw)
        checks = {
            "nonnegative": min(duv, duw, dvw) >= -tol,
            "self_zero": duu <= tol,
            "symmetric": abs(duv - dvu) <= tol * scale,
            "triangle": duw <= duv + dvw + tol * scale,
            "indiscernible": duv > tol or bool(np.allclose(u.values, v.values, rtol=0, atol=tol)),
        }
        for name, ok in checks.items():
            if not ok:
                violations.append({"triple": k, "axiom": name})
        samples.append({"triple": k, "d_uv": duv, "d_vu": dvu, "d_uw": duw, "d_vw": dvw,
                        "d_uu": duu, "triangle_slack": duv + dvw - duw})
    seed = triples.seed if isinstance(triples, FunctionFamily) else None
    info = _info(triples) if isinstance(triples, FunctionFamily) else grid.describe()
    return StructuralReport(
        "metric", seed, info, not violations,
        {"triples": len(ts), "violations": violations, "tolerance": tol,
         "second_slot": "D_i v"},
        samples,
        notes=["the second derivative factor uses D_i v for the second argument"],
    )


def check_homeomorphism_sequences(u0: GridFunction, perturbation, spec: SpaceSpec,
                                  ms: Sequence[int] | None = None,
                                  decay: float = 1e-3) -> StructuralReport:
    """Distances along ``u_m = u0 + w/m`` in both topologies.

    ``a_m = d(u_m, u0)`` with the metric of the pn-space and
    ``b_m = ||phi(u_m) - phi(u0)||_psi + sum_i ||D_i(phi(u_m) - phi(u0))||_beta``.
    Passes when both final values are below ``decay`` times the initial ones.
    """
    grid = u0.grid
    if isinstance(perturbation, (str, exprlang.Expr)):
        w = exprlang.sample(perturbation, grid)
    else:
        w = perturbation
    ms = list(ms) if ms is not None else list(range(1, 65))
    f = spec.fields(grid)
    g, b = f["gamma"], f["beta"]
    psi = psi_exponent(f["theta"], g, b)
    m = PhiMap(g, b)
    phi0 = phi_apply(u0, m)
    a_seq, b_seq = [], []
    for k in ms:
        um = u0 + w * (1.0 / k)
        a_seq.append(metric_var(um, u0, g, b, psi))
        dphi = phi_apply(um, m) - phi0
        val = luxemburg_norm(dphi, psi).value
        for i in range(grid.dim):
            val += luxemburg_norm(diff(dphi, i), b).value
        b_seq.append(val)

    def decays(seq):
        return seq[0] == 0.0 and seq[-1] == 0.0 or seq[-1] < decay * seq[0]

    def monotone(seq):
        return all(y <= x * (1 + 1e-9) for x, y in zip(seq, seq[1:]))

    ratios = [x / y for x, y in zip(a_seq, b_seq) if y > 0]
    details = {
        "m": ms,
        "a": a_seq,
        "b": b_seq,
        "a_final_over_initial": a_seq[-1] / a_seq[0] if a_seq[0] > 0 else 0.0,
        "b_final_over_initial": b_seq[-1] / b_seq[0] if b_seq[0] > 0 else 0.0,
        "a_monotone": monotone(a_seq),
        "b_monotone": monotone(b_seq),
        "a_over_b_range": [min(ratios), max(ratios)] if ratios else None,
        "decay_threshold": decay,
    }
    return StructuralReport("homeo", None, grid.describe(),
                            bool(decays(a_seq) and decays(b_seq)), details)

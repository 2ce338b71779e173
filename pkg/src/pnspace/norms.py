"""Infimum-type norms and pseudo-norms, Sobolev norms and the two metrics.

Every infimum ``inf{lam > 0 : F(lam) <= 1}`` below has a modular ``F`` that
is a positive combination of powers ``lam^(-e(x))``, hence continuous and
strictly decreasing. It is solved by bisection on ``log lam`` starting from
the bracket ``[M^(1/e+), M^(1/e-)]`` (sorted), where ``M = F(1)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NoConvergence
from .grid import GridFunction, diff, gradient_magnitude
from .modulars import (
    CONST,
    TILDE,
    VAR,
    VAR_THETA,
    ExponentSource,
    SpaceSpec,
    abs_pow,
    pn_modular,
    resolve_field,
)
from .transforms import PhiMap, g_apply, g_prime, phi_apply, phi_prime

__all__ = [
    "NormResult",
    "ZERO_MODULAR",
    "solve_scale",
    "luxemburg_norm",
    "pn_pseudonorm",
    "sobolev_norm",
    "metric_const",
    "metric_var",
]

ZERO_MODULAR = 1e-300
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class NormResult:
    """Outcome of an infimum solve.

    Attributes
    ----------
    value : float
        The norm or pseudo-norm.
    iterations : int
        Modular evaluations spent on bracketing and bisection.
    bracket : tuple of float
        Final ``(lam_lo, lam_hi)``.
    residual : float
        ``|F(value) - 1|``, or 0 for the zero function.
    form : str
        Which definition produced ``value`` (``'luxemburg'``, ``'inf'``,
        ``'sum'`` or ``'closed'``).
    """

    value: float
    iterations: int
    bracket: tuple[float, float]
    residual: float
    form: str = "luxemburg"

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return d


class _PowerSum:
    """``F(lam) = sum_k w_k lam^(-e_k)`` over nodes with positive weight."""

    def __init__(self, weights: np.ndarray, exponents: np.ndarray):
        w = np.ravel(weights)
        e = np.broadcast_to(exponents, np.shape(weights)).ravel()
        keep = w > 0
        self.w = w[keep]
        self.e = e[keep]
        self.m1 = float(np.sum(self.w))
        self.e_lo = float(self.e.min()) if self.w.size else 1.0
        self.e_hi = float(self.e.max()) if self.w.size else 1.0

    def __call__(self, lam: float) -> float:
        return float(np.sum(self.w * np.exp(-self.e * math.log(lam))))


def solve_scale(F: _PowerSum, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                form: str = "luxemburg") -> NormResult:
    """Find ``lam`` with ``F(lam) = 1`` by geometric bisection."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if F.m1 < ZERO_MODULAR:
        return NormResult(0.0, 0, (0.0, 0.0), 0.0, form)
    a = F.m1 ** (1.0 / F.e_lo)
    b = F.m1 ** (1.0 / F.e_hi)
    lo, hi = min(a, b), max(a, b)
    it = 0
    f_lo, f_hi = F(lo), F(hi)
    it += 2
    # rounding can leave the endpoints on the same side of 1
    while f_lo < 1.0 and it < max_iter:
        lo *= 0.5
        f_lo = F(lo)
        it += 1
    while f_hi > 1.0 and it < max_iter:
        hi *= 2.0
        f_hi = F(hi)
        it += 1
    while it < max_iter:
        mid = math.sqrt(lo) * math.sqrt(hi)
        if not lo < mid < hi:
            break
        f_mid = F(mid)
        it += 1
        if f_mid > 1.0:
            lo, f_lo = mid, f_mid
        elif f_mid < 1.0:
            hi, f_hi = mid, f_mid
        else:
            lo = hi = mid
            f_lo = f_hi = f_mid
            break
    r_lo, r_hi = abs(f_lo - 1.0), abs(f_hi - 1.0)
    value, residual = (lo, r_lo) if r_lo <= r_hi else (hi, r_hi)
    if not residual <= tol:
        raise NoConvergence(
            f"bisection stopped after {it} evaluations with residual {residual:.3e} "
            f"> tol {tol:.1e} (bracket [{lo!r}, {hi!r}])"
        )
    return NormResult(float(value), it, (float(lo), float(hi)), float(residual), form)


def luxemburg_norm(u: GridFunction, p: ExponentSource, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER) -> NormResult:
    """``inf{lam > 0 : integral |u/lam|^p(x) <= 1}``."""
    pf = resolve_field(p, u.grid, floor=1.0).values
    w = u.grid.weights * abs_pow(u.values, pf)
    return solve_scale(_PowerSum(w, pf), tol, max_iter, "luxemburg")


def _mixed_weights(u: GridFunction, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    total = np.zeros(u.grid.shape)
    for i in range(u.grid.dim):
        total = total + abs_pow(u.values, g) * abs_pow(diff(u, i).values, b)
    return total


def pn_pseudonorm(u: GridFunction, spec: SpaceSpec, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, form: str = "sum") -> NormResult:
    """Pseudo-norm of ``u`` in the space described by ``spec``.

    Constant-exponent specs are homogeneous of degree ``alpha + beta`` and use
    the closed form ``M^(1/(alpha+beta))``. ``S1_var`` bisects the scaled
    modular. For ``S1_var_theta`` ``form`` selects ``'inf'`` (one infimum
    over both terms) or ``'sum'`` (the ``S1_var`` pseudo-norm plus the
    ``L^theta`` norm).
    """
    if spec.kind in (CONST, TILDE):
        M = pn_modular(u, spec)
        deg = spec.homogeneity()
        if M < ZERO_MODULAR:
            return NormResult(0.0, 0, (0.0, 0.0), 0.0, "closed")
        val = M ** (1.0 / deg)
        return NormResult(val, 0, (val, val), abs(M / val**deg - 1.0), "closed")
    f = spec.fields(u.grid)
    g, b = f["gamma"].values, f["beta"].values
    qw = u.grid.weights
    if spec.kind == VAR:
        w = qw * (abs_pow(u.values, g + b) + _mixed_weights(u, g, b))
        return solve_scale(_PowerSum(w, g + b), tol, max_iter, "inf")
    if spec.kind != VAR_THETA:
        raise ValueError(f"unknown space kind {spec.kind!r}")
    th = f["theta"].values
    if form == "inf":
        w = np.concatenate([(qw * abs_pow(u.values, th)).ravel(),
                            (qw * _mixed_weights(u, g, b)).ravel()])
        e = np.concatenate([th.ravel(), np.broadcast_to(g + b, u.grid.shape).ravel()])
        return solve_scale(_PowerSum(w, e), tol, max_iter, "inf")
    if form != "sum":
        raise ValueError(f"form must be 'inf' or 'sum', got {form!r}")
    a = pn_pseudonorm(u, SpaceSpec.var(spec.gamma, spec.beta), tol, max_iter)
    c = luxemburg_norm(u, spec.theta, tol, max_iter)
    return NormResult(
        a.value + c.value,
        a.iterations + c.iterations,
        (a.bracket[0] + c.bracket[0], a.bracket[1] + c.bracket[1]),
        max(a.residual, c.residual),
        "sum",
    )


def sobolev_norm(u: GridFunction, p: ExponentSource, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> float:
    """``||u||_p + || |grad u| ||_p`` with the Euclidean gradient magnitude."""
    return (luxemburg_norm(u, p, tol, max_iter).value
            + luxemburg_norm(gradient_magnitude(u), p, tol, max_iter).value)


def metric_const(u: GridFunction, v: GridFunction, alpha: float, beta: float,
                 tol: float = DEFAULT_TOL) -> float:
    """``||g(u) - g(v)||_{W^{1,beta}}`` with ``g(t) = |t|^(alpha/beta) t``.

    The gradient of ``g(u)`` is taken by the chain rule ``g'(u) D_i u`` so the
    result matches the variable-exponent metric term by term.
    """
    diff_g = g_apply(u, alpha, beta) - g_apply(v, alpha, beta)
    gu, gv = g_prime(u, alpha, beta).values, g_prime(v, alpha, beta).values
    sq = np.zeros(u.grid.shape)
    for i in range(u.grid.dim):
        sq = sq + (gu * diff(u, i).values - gv * diff(v, i).values) ** 2
    grad = GridFunction(u.grid, np.sqrt(sq))
    return luxemburg_norm(diff_g, beta, tol).value + luxemburg_norm(grad, beta, tol).value


def metric_var(u: GridFunction, v: GridFunction, gamma: ExponentSource, beta: ExponentSource,
               psi: ExponentSource, tol: float = DEFAULT_TOL) -> float:
    """``||phi(u) - phi(v)||_{L^psi} + sum_i ||phi'(u) D_i u - phi'(v) D_i v||_{L^beta}``."""
    m = PhiMap(gamma, beta)
    total = luxemburg_norm(phi_apply(u, m) - phi_apply(v, m), psi, tol).value
    pu, pv = phi_prime(u, m).values, phi_prime(v, m).values
    for i in range(u.grid.dim):
        d = GridFunction(u.grid, pu * diff(u, i).values - pv * diff(v, i).values)
        total += luxemburg_norm(d, beta, tol).value
    return total

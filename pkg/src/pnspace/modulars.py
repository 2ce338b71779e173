"""Modulars (integral functionals) of pn-spaces and variable-exponent spaces.

Exponents may be given as numbers, expression strings, parsed expressions or
grid functions; :func:`resolve_field` turns any of these into an
:class:`~pnspace.grid.ExponentField` on a concrete grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import exprlang
from .errors import ConditionViolated, UnsupportedOrder
from .grid import (
    ExponentField,
    Grid,
    GridFunction,
    as_field,
    boundary_trace,
    diff,
    diff2,
    diff_mixed,
    integrate,
    integrate_boundary,
)

__all__ = [
    "SpaceSpec",
    "resolve_field",
    "abs_pow",
    "lebesgue_modular",
    "mixed_modular",
    "pn_modular",
    "pn_terms",
    "theta_modular",
    "log_modular",
    "boundary_pn_modular",
]

ExponentSource = Union[float, int, str, exprlang.Expr, GridFunction]

CONST = "S_m_const"
VAR = "S1_var"
VAR_THETA = "S1_var_theta"
TILDE = "S2_tilde_1d"


def resolve_field(value: ExponentSource, grid: Grid, floor: float = 1.0) -> ExponentField:
    """Sample an exponent description on ``grid``.

    ``floor`` is 1 for integrability exponents and 0 for weight exponents.
    """
    if isinstance(value, str):
        value = exprlang.parse(value)
    if isinstance(value, exprlang.Expr):
        value = exprlang.sample(value, grid)
    return as_field(value, grid, floor=floor)


def abs_pow(values: np.ndarray, exponent) -> np.ndarray:
    """``|values|**exponent`` with ``0**0 = 1``."""
    with np.errstate(divide="ignore"):
        return np.power(np.abs(values), exponent)


def _is_number(x) -> bool:
    return isinstance(x, (int, float, np.floating, np.integer))


@dataclass(frozen=True)
class SpaceSpec:
    """Which modular to compute and with which exponents.

    Build instances with :meth:`const`, :meth:`var`, :meth:`var_theta` or
    :meth:`tilde_1d` rather than the raw constructor.

    Attributes
    ----------
    kind : str
        ``'S_m_const'``, ``'S1_var'``, ``'S1_var_theta'`` or ``'S2_tilde_1d'``.
    vanishing : bool
        Boundary-vanishing variant. For constant exponents the zeroth-order
        term is dropped and only the top-order pure derivatives remain.
    mixed_partials : bool
        Add the ``D_1 D_2 u`` term to second-order modulars in 2D.
    """

    kind: str
    m: int = 1
    alpha: ExponentSource | None = None
    beta: ExponentSource | None = None
    gamma: ExponentSource | None = None
    theta: ExponentSource | None = None
    eps0: float | None = None
    vanishing: bool = False
    mixed_partials: bool = False

    @classmethod
    def const(cls, m: int, alpha: float, beta: float, vanishing=False, mixed_partials=False):
        if m > 2:
            raise UnsupportedOrder(f"derivative order m={m} is not supported (m <= 2)")
        if m < 1:
            raise ValueError(f"m must be 1 or 2, got {m}")
        if alpha < 0 or beta < 1:
            raise ValueError(f"need alpha >= 0 and beta >= 1, got alpha={alpha}, beta={beta}")
        return cls(CONST, m=m, alpha=float(alpha), beta=float(beta),
                   vanishing=vanishing, mixed_partials=mixed_partials)

    @classmethod
    def var(cls, gamma: ExponentSource, beta: ExponentSource):
        cls._check_constant(gamma, 0.0, "gamma")
        cls._check_constant(beta, 1.0, "beta")
        return cls(VAR, gamma=gamma, beta=beta)

    @classmethod
    def var_theta(cls, gamma, beta, theta, eps0: float | None = None):
        """Space with the extra ``L^theta`` term; needs ``theta >= gamma + beta + eps0``.

        When ``eps0`` is omitted it is taken as ``min(theta - gamma - beta)``
        on each grid the spec is used with, which must then be positive.
        """
        cls._check_constant(gamma, 0.0, "gamma")
        cls._check_constant(beta, 1.0, "beta")
        cls._check_constant(theta, 1.0, "theta")
        if eps0 is not None and not eps0 > 0:
            raise ValueError(f"eps0 must be positive, got {eps0}")
        if all(_is_number(v) for v in (gamma, beta, theta)):
            gap = float(theta) - float(gamma) - float(beta)
            if not gap >= (eps0 if eps0 is not None else np.finfo(float).tiny):
                raise ConditionViolated(
                    f"theta={theta} < gamma + beta + eps0 = {gamma + beta} + {eps0 or 0}"
                )
        return cls(VAR_THETA, gamma=gamma, beta=beta, theta=theta, eps0=eps0)

    @classmethod
    def tilde_1d(cls, alpha: float, beta: float):
        if not (alpha > beta - 1 >= 0):
            raise ValueError(f"need alpha > beta - 1 >= 0, got alpha={alpha}, beta={beta}")
        return cls(TILDE, m=2, alpha=float(alpha), beta=float(beta))

    @staticmethod
    def _check_constant(value, floor, name):
        if _is_number(value) and value < floor:
            raise ValueError(f"{name} must be >= {floor}, got {value}")

    # -- resolution on a grid -------------------------------------------------

    def fields(self, grid: Grid) -> dict[str, ExponentField]:
        """Exponents of this spec sampled on ``grid``."""
        out = {}
        if self.kind in (CONST, TILDE):
            out["alpha"] = resolve_field(self.alpha, grid, floor=0.0)
            out["beta"] = resolve_field(self.beta, grid, floor=1.0)
            return out
        out["gamma"] = resolve_field(self.gamma, grid, floor=0.0)
        out["beta"] = resolve_field(self.beta, grid, floor=1.0)
        if self.kind == VAR_THETA:
            theta = resolve_field(self.theta, grid, floor=1.0)
            gap = theta.values - out["gamma"].values - out["beta"].values
            eps0 = self.eps0 if self.eps0 is not None else float(gap.min())
            if not eps0 > 0 or np.any(gap < eps0 - 1e-12):
                i = np.unravel_index(np.argmin(gap), gap.shape)
                raise ConditionViolated(
                    f"theta < gamma + beta + eps0 at node {tuple(int(k) for k in i)} "
                    f"(gap {gap[i]!r}, eps0 {eps0!r})"
                )
            out["theta"] = theta
        return out

    def homogeneity(self) -> float | None:
        """Common degree of all terms for constant-exponent specs, else None."""
        if self.kind in (CONST, TILDE):
            return float(self.alpha) + float(self.beta)
        return None

    def describe(self) -> dict:
        def show(v):
            if v is None or _is_number(v):
                return v
            if isinstance(v, exprlang.Expr):
                return exprlang.to_text(v)
            if isinstance(v, str):
                return v
            return "<field>"

        return {
            "kind": self.kind,
            "m": self.m,
            "alpha": show(self.alpha),
            "beta": show(self.beta),
            "gamma": show(self.gamma),
            "theta": show(self.theta),
            "eps0": self.eps0,
            "vanishing": self.vanishing,
            "mixed_partials": self.mixed_partials,
        }


# --- modulars ----------------------------------------------------------------


def _values(p, grid, floor):
    if _is_number(p):
        if p < floor:
            raise ValueError(f"exponent {p} is below {floor}")
        return float(p)
    if isinstance(p, np.ndarray):
        if np.any(p < floor):
            raise ValueError(f"exponent values below {floor}")
        return p
    return resolve_field(p, grid, floor).values


def lebesgue_modular(u: GridFunction, p) -> float:
    """``integral |u|^p(x)``."""
    return integrate(GridFunction(u.grid, abs_pow(u.values, _values(p, u.grid, 1.0))))


def _weighted(u: np.ndarray, du: np.ndarray, gamma, beta) -> np.ndarray:
    return abs_pow(u, gamma) * abs_pow(du, beta)


def mixed_modular(u: GridFunction, gamma, beta, axis: int | None = None) -> float:
    """``sum_i integral |u|^gamma |D_i u|^beta``, or the single ``axis`` term."""
    g = _values(gamma, u.grid, 0.0)
    b = _values(beta, u.grid, 1.0)
    axes = range(u.grid.dim) if axis is None else [axis]
    total = 0.0
    for i in axes:
        total += integrate(GridFunction(u.grid, _weighted(u.values, diff(u, i).values, g, b)))
    return total


def theta_modular(u: GridFunction, gamma, beta, theta) -> float:
    """``integral |u|^theta + sum_i integral |u|^gamma |D_i u|^beta``."""
    return lebesgue_modular(u, theta) + mixed_modular(u, gamma, beta)


def _integral_or_inf(grid: Grid, values: np.ndarray) -> float:
    if not np.all(np.isfinite(values)):
        return float("inf")
    return integrate(GridFunction(grid, values))


def pn_terms(u: GridFunction, spec: SpaceSpec) -> dict[str, float]:
    """Every term of the modular of ``spec`` keyed by a short label.

    Labels: ``'k0'`` zeroth order, ``'d1_i'`` first derivative along axis i,
    ``'d2_i'`` pure second derivative, ``'d12'`` mixed partial, ``'theta'``
    the ``L^theta`` term and, for the 1D tilde space, ``'grad2'`` for
    ``|u|^(alpha-beta) |Du|^(2 beta)``.
    """
    grid, v = u.grid, u.values
    f = spec.fields(grid)
    terms: dict[str, float] = {}
    if spec.kind == CONST:
        a, b = f["alpha"].values, f["beta"].values
        top_only = spec.vanishing
        if not top_only:
            terms["k0"] = integrate(GridFunction(grid, abs_pow(v, a + b)))
        if spec.m == 1 or not top_only:
            for i in range(grid.dim):
                terms[f"d1_{i}"] = integrate(GridFunction(grid, _weighted(v, diff(u, i).values, a, b)))
        if spec.m == 2:
            for i in range(grid.dim):
                terms[f"d2_{i}"] = integrate(GridFunction(grid, _weighted(v, diff2(u, i).values, a, b)))
            if spec.mixed_partials and grid.dim == 2:
                terms["d12"] = integrate(GridFunction(grid, _weighted(v, diff_mixed(u).values, a, b)))
        return terms
    if spec.kind == TILDE:
        if grid.dim != 1:
            raise ValueError("the S2 tilde space is defined on intervals only")
        a, b = float(spec.alpha), float(spec.beta)
        du, d2u = diff(u).values, diff2(u).values
        terms["k0"] = integrate(GridFunction(grid, abs_pow(v, a + b)))
        with np.errstate(invalid="ignore", divide="ignore"):
            # a - b may be negative; such a weight is infinite where u = 0
            grad2 = abs_pow(v, a - b) * abs_pow(du, 2 * b)
        grad2 = np.where(abs_pow(du, 2 * b) == 0, 0.0, grad2)
        terms["grad2"] = _integral_or_inf(grid, grad2)
        terms["d2_0"] = integrate(GridFunction(grid, _weighted(v, d2u, a, b)))
        return terms
    g, b = f["gamma"].values, f["beta"].values
    if spec.kind == VAR:
        terms["k0"] = integrate(GridFunction(grid, abs_pow(v, g + b)))
    else:
        terms["theta"] = integrate(GridFunction(grid, abs_pow(v, f["theta"].values)))
    for i in range(grid.dim):
        terms[f"d1_{i}"] = integrate(GridFunction(grid, _weighted(v, diff(u, i).values, g, b)))
    return terms


def pn_modular(u: GridFunction, spec: SpaceSpec) -> float:
    """Sum of the terms of :func:`pn_terms`, in a fixed order."""
    return float(sum(pn_terms(u, spec).values()))


def log_modular(u: GridFunction, zeta, beta) -> float:
    """``integral |u|^zeta |ln|u||^beta`` with the integrand 0 where u = 0."""
    z = _values(zeta, u.grid, 0.0)
    b = _values(beta, u.grid, 0.0)
    a = np.abs(u.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.abs(np.log(a))
        vals = np.where(a == 0, 0.0, abs_pow(a, z) * np.power(logs, b))
    return integrate(GridFunction(u.grid, vals))


def boundary_pn_modular(u: GridFunction, exponent: float) -> float:
    """``integral over the boundary of |u|^exponent``."""
    if exponent < 1:
        raise ValueError(f"boundary exponent must be >= 1, got {exponent}")
    return integrate_boundary(boundary_trace(u).abs_power(exponent))

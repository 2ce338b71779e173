"""Signed-power maps between pn-spaces and Sobolev-type spaces.

``g(t) = |t|^(alpha/beta) t`` for constant exponents and
``phi(x, t) = |t|^(gamma(x)/beta(x)) t`` for variable ones, together with
their inverses, derivatives in ``t``, the exponent map ``psi`` and the
residuals of the chain-rule decomposition of ``D_i phi(u)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditionViolated
from .grid import ExponentField, Grid, GridFunction, diff
from .modulars import ExponentSource, resolve_field

__all__ = [
    "PhiMap",
    "g_apply",
    "g_inverse",
    "g_prime",
    "g_second",
    "phi_apply",
    "phi_prime",
    "phi_inverse",
    "psi_exponent",
    "chain_rule_residual",
    "decomposition_residual",
    "interior_max",
]


def _check_const(alpha: float, beta: float) -> None:
    if alpha < 0 or beta < 1:
        raise ValueError(f"need alpha >= 0 and beta >= 1, got alpha={alpha}, beta={beta}")


def _signed_power(t: np.ndarray, e) -> np.ndarray:
    """``|t|^e t`` with the value 0 at t = 0 (e >= 0)."""
    return np.power(np.abs(t), e) * t


def g_apply(u: GridFunction, alpha: float, beta: float) -> GridFunction:
    _check_const(alpha, beta)
    return GridFunction(u.grid, _signed_power(u.values, alpha / beta))


def g_inverse(v: GridFunction, alpha: float, beta: float) -> GridFunction:
    """``|s|^(-alpha/(alpha+beta)) s``, evaluated as ``sign(s)|s|^(beta/(alpha+beta))``."""
    _check_const(alpha, beta)
    s = v.values
    return GridFunction(v.grid, np.sign(s) * np.power(np.abs(s), beta / (alpha + beta)))


def g_prime(u: GridFunction, alpha: float, beta: float) -> GridFunction:
    r = alpha / beta
    return GridFunction(u.grid, (r + 1.0) * np.power(np.abs(u.values), r))


def g_second(u: GridFunction, alpha: float, beta: float) -> GridFunction:
    """``r(r+1)|t|^(r-1) sign(t)`` with ``r = alpha/beta``; set to 0 at t = 0."""
    r = alpha / beta
    t = u.values
    with np.errstate(divide="ignore", invalid="ignore"):
        val = r * (r + 1.0) * np.power(np.abs(t), r - 1.0) * np.sign(t)
    return GridFunction(u.grid, np.where(t == 0, 0.0, val))


@dataclass(frozen=True)
class PhiMap:
    """Exponent pair of ``phi(x, t) = |t|^(gamma/beta) t``."""

    gamma: ExponentSource
    beta: ExponentSource

    def fields(self, grid: Grid) -> tuple[ExponentField, ExponentField]:
        return (
            resolve_field(self.gamma, grid, floor=0.0),
            resolve_field(self.beta, grid, floor=1.0),
        )

    def ratio(self, grid: Grid) -> np.ndarray:
        """Nodewise ``gamma / beta``."""
        g, b = self.fields(grid)
        return g.values / b.values


def phi_apply(u: GridFunction, m: PhiMap) -> GridFunction:
    return GridFunction(u.grid, _signed_power(u.values, m.ratio(u.grid)))


def phi_prime(u: GridFunction, m: PhiMap) -> GridFunction:
    """``(gamma/beta + 1)|t|^(gamma/beta)``; at t = 0 this is 0 if gamma > 0, else 1."""
    r = m.ratio(u.grid)
    return GridFunction(u.grid, (r + 1.0) * np.power(np.abs(u.values), r))


def phi_inverse(v: GridFunction, m: PhiMap) -> GridFunction:
    """Nodewise inverse ``sign(s)|s|^(beta/(gamma+beta))``."""
    r = m.ratio(v.grid)
    s = v.values
    return GridFunction(v.grid, np.sign(s) * np.power(np.abs(s), 1.0 / (r + 1.0)))


def psi_exponent(theta, gamma, beta, eps0: float = 0.0, grid: Grid | None = None):
    """``theta beta / (gamma + beta)``.

    Returns an :class:`ExponentField` when a grid is available (passed in or
    carried by one of the arguments) and a float for three plain numbers.

    Raises
    ------
    ConditionViolated
        If ``theta < gamma + beta + eps0`` at some node.
    """
    if grid is None:
        for v in (theta, gamma, beta):
            if isinstance(v, GridFunction):
                grid = v.grid
                break
    if grid is None:
        t, g, b = float(theta), float(gamma), float(beta)
        if t < g + b + eps0 - 1e-12:
            raise ConditionViolated(f"theta={t} < gamma + beta + eps0 = {g + b + eps0}")
        return t * b / (g + b)
    t = resolve_field(theta, grid, 1.0).values
    g = resolve_field(gamma, grid, 0.0).values
    b = resolve_field(beta, grid, 1.0).values
    gap = t - g - b - eps0
    if np.any(gap < -1e-12):
        i = np.unravel_index(np.argmin(gap), gap.shape)
        raise ConditionViolated(
            f"theta < gamma + beta + eps0 at node {tuple(int(k) for k in i)} "
            f"(shortfall {-gap[i]!r})"
        )
    return ExponentField(grid, t * b / (g + b), floor=1.0)


def _u_pow_log(u: np.ndarray, r) -> np.ndarray:
    """``|u|^r u ln|u|`` with ``0 ln 0 = 0``."""
    a = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.power(a, r) * u * np.log(a)
    return np.where(a == 0, 0.0, val)


def _zero_boundary(grid: Grid, values: np.ndarray) -> GridFunction:
    v = np.array(values)
    v[grid.boundary_mask] = 0.0
    return GridFunction(grid, v)


def chain_rule_residual(u: GridFunction, m: PhiMap) -> tuple[GridFunction, ...]:
    """Per-axis ``D_i phi(u) - phi'(u) D_i u - D_i(gamma/beta) |u|^(gamma/beta) u ln|u|``.

    All derivatives use the grid stencils, including the one of the exponent
    ratio. Boundary nodes are set to zero; only interior values are meaningful.
    """
    grid = u.grid
    r = m.ratio(grid)
    phi = phi_apply(u, m)
    dphi_dt = phi_prime(u, m).values
    ulog = _u_pow_log(u.values, r)
    r_fn = GridFunction(grid, np.broadcast_to(r, grid.shape))
    out = []
    for i in range(grid.dim):
        res = diff(phi, i).values - dphi_dt * diff(u, i).values - diff(r_fn, i).values * ulog
        out.append(_zero_boundary(grid, res))
    return tuple(out)


def decomposition_residual(u: GridFunction, m: PhiMap) -> tuple[GridFunction, ...]:
    """Residual of the decomposition with the ``beta/(beta+gamma)`` prefactor.

    Computes ``phi'(u) D_i u - [beta/(beta+gamma) D_i phi(u)
    - (D_i gamma beta - gamma D_i beta)/(beta (gamma+beta)) |u|^(gamma/beta) u ln|u|]``
    for a single function (the second function of the pair taken as 0).
    This form does not reduce to the chain rule: for constant exponents the
    residual equals ``(gamma/beta)|u|^(gamma/beta) D_i u``. It is reported,
    not certified.
    """
    grid = u.grid
    gf, bf = m.fields(grid)
    g, b = gf.values, bf.values
    r = g / b
    phi = phi_apply(u, m)
    ulog = _u_pow_log(u.values, r)
    dphi_dt = phi_prime(u, m).values
    out = []
    for i in range(grid.dim):
        dg, db = diff(gf, i).values, diff(bf, i).values
        coeff = (dg * b - g * db) / (b * (g + b))
        rhs = b / (b + g) * diff(phi, i).values - coeff * ulog
        out.append(_zero_boundary(grid, dphi_dt * diff(u, i).values - rhs))
    return tuple(out)


def interior_max(f: GridFunction) -> float:
    """Max of ``|f|`` over interior nodes."""
    return float(np.max(np.abs(f.values[~f.grid.boundary_mask])))

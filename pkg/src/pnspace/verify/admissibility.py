"""Case analysis of the embedding exponents for constant-exponent spaces."""

from __future__ import annotations

from ..errors import HypothesisViolated
from .report import AdmissibilityDecision

__all__ = ["admissible_theorem_3_1", "admissible_theorem_3_2"]

_EQ = 1e-12


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= _EQ * max(1.0, abs(a), abs(b))


def admissible_theorem_3_1(alpha: float, beta: float, n: int, p: float | None = None
                           ) -> AdmissibilityDecision:
    """Range of p for ``W_0^{1,p} subset S0_{1,alpha,beta}``.

    (i) ``beta = n``: ``p > beta``; (ii) ``beta > n``: ``p >= beta``;
    (iii) ``beta < n``: ``p >= n(alpha+beta)/(alpha+n)``.
    """
    bad = []
    if not alpha >= 0:
        bad.append(f"alpha >= 0 fails (alpha={alpha})")
    if not beta >= 1:
        bad.append(f"beta >= 1 fails (beta={beta})")
    if not n >= 1:
        bad.append(f"n >= 1 fails (n={n})")
    if bad:
        raise HypothesisViolated("; ".join(bad))
    inputs = {"alpha": alpha, "beta": beta, "n": n}
    if _same(beta, n):
        return AdmissibilityDecision("3.1", inputs, "i", float(beta), ">", None, p)
    if beta > n:
        return AdmissibilityDecision("3.1", inputs, "ii", float(beta), ">=", None, p)
    thr = n * (alpha + beta) / (alpha + n)
    return AdmissibilityDecision("3.1", inputs, "iii", thr, ">=", None, p)


def admissible_theorem_3_2(alpha: float, beta: float, n: int, p: float | None = None
                           ) -> AdmissibilityDecision:
    """Range of p for ``S0_{2,alpha,beta} subset W_0^{1,p}``; needs ``beta > alpha >= 0, beta >= 2``.

    (i) ``alpha+beta = n``: ``1 <= p < 2 beta``; (ii) ``alpha+beta > n``:
    ``1 <= p <= 2 beta``; (iii) ``alpha+beta < n``:
    ``1 <= p <= 2 n beta (alpha+beta) / (2 n beta - (alpha+beta)(beta-alpha))``.
    """
    bad = []
    if not alpha >= 0:
        bad.append(f"alpha >= 0 fails (alpha={alpha})")
    if not beta > alpha:
        bad.append(f"beta > alpha fails (alpha={alpha}, beta={beta})")
    if not beta >= 2:
        bad.append(f"beta >= 2 fails (beta={beta})")
    if not n >= 1:
        bad.append(f"n >= 1 fails (n={n})")
    if bad:
        raise HypothesisViolated("; ".join(bad))
    inputs = {"alpha": alpha, "beta": beta, "n": n}
    s = alpha + beta
    if _same(s, n):
        return AdmissibilityDecision("3.2", inputs, "i", 2.0 * beta, "<", 1.0, p)
    if s > n:
        return AdmissibilityDecision("3.2", inputs, "ii", 2.0 * beta, "<=", 1.0, p)
    thr = 2.0 * n * beta * s / (2.0 * n * beta - s * (beta - alpha))
    return AdmissibilityDecision("3.2", inputs, "iii", thr, "<=", 1.0, p)

"""Smallest-sum nonnegative constants satisfying ``lhs_i <= sum_j c_j terms_ij``.

The inequalities checked here carry at most three constants, so the linear
program ``min sum(c)  s.t.  terms @ c >= lhs, c >= 0`` is solved exactly by
enumerating the vertices of the feasible polyhedron.
"""

from __future__ import annotations

from itertools import combinations, islice

import numpy as np

from ..errors import Infeasible

__all__ = ["fit_constants", "constraint_margins"]

_CHUNK = 100_000


def _pareto_minimal(rows: np.ndarray) -> np.ndarray:
    """Drop rows implied by another row (``r_s <= r_i`` componentwise)."""
    rows = np.unique(rows, axis=0)
    keep = np.ones(len(rows), dtype=bool)
    for i in range(len(rows)):
        if not keep[i]:
            continue
        dominated = np.all(rows <= rows[i], axis=1) & np.any(rows < rows[i], axis=1)
        if np.any(dominated & keep):
            keep[i] = False
    return rows[keep]


def constraint_margins(lhs, terms, constants) -> np.ndarray:
    """``terms @ constants - lhs`` per row."""
    return np.asarray(terms, float) @ np.asarray(constants, float) - np.asarray(lhs, float)


def fit_constants(lhs, terms) -> np.ndarray:
    """Solve the constant-fitting linear program.

    Parameters
    ----------
    lhs : array_like, shape (m,)
    terms : array_like, shape (m, k)
        Nonnegative.

    Returns
    -------
    ndarray, shape (k,)
        Minimizer of ``sum(c)``; ties are broken toward the lexicographically
        smallest vector.

    Raises
    ------
    Infeasible
        When a row has ``lhs > 0`` but all its terms are zero.
    """
    b = np.asarray(lhs, dtype=float).ravel()
    A = np.asarray(terms, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.shape[0] != b.size:
        raise ValueError(f"{b.size} lhs values but {A.shape[0]} term rows")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("lhs and terms must be finite")
    if np.any(A < 0):
        raise ValueError("terms must be nonnegative")
    k = A.shape[1]
    active = b > 0
    if not np.any(active):
        return np.zeros(k)
    dead = active & np.all(A == 0, axis=1)
    if np.any(dead):
        row = int(np.flatnonzero(dead)[0])
        raise Infeasible(f"lhs {b[row]!r} > 0 with all terms zero", row)

    R = _pareto_minimal(A[active] / b[active, None])
    planes = np.vstack([R, np.eye(k)])
    rhs = np.concatenate([np.ones(len(R)), np.zeros(k)])

    best, best_sum = None, np.inf
    combos = combinations(range(len(planes)), k)
    while True:
        idx = np.array(list(islice(combos, _CHUNK)), dtype=np.intp)
        if idx.size == 0:
            break
        M = planes[idx]  # (chunk, k, k)
        y = rhs[idx]
        det = np.linalg.det(M)
        scale = np.prod(np.max(np.abs(M), axis=2), axis=1)
        ok = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
        if not np.any(ok):
            continue
        c = np.linalg.solve(M[ok], y[ok][..., None])[..., 0]
        tol = 1e-9 * np.maximum(1.0, np.max(np.abs(c), axis=1))
        feas = np.all(c >= -tol[:, None], axis=1) & np.all(R @ c.T >= 1.0 - 1e-9, axis=0)
        if not np.any(feas):
            continue
        c = np.clip(c[feas], 0.0, None)
        sums = c.sum(axis=1)
        for cand, s in zip(c, sums):
            if s < best_sum * (1 - 1e-12) or (
                s <= best_sum * (1 + 1e-12) and tuple(cand) < tuple(best)
            ):
                best, best_sum = cand, s
    if best is None:
        raise RuntimeError("vertex enumeration found no feasible vertex")
    # rescale so every original constraint holds despite rounding
    prod = A[active] @ best
    with np.errstate(divide="ignore"):
        ratio = np.where(prod > 0, b[active] / prod, np.inf)
    worst = float(np.max(ratio))
    if worst > 1.0:
        best = best * worst
    return best

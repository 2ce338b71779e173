"""Report containers shared by the verifiers; all serialize to JSON."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["InequalityReport", "StructuralReport", "AdmissibilityDecision", "jsonable"]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


@dataclass
class InequalityReport:
    """Per-sample evaluation of ``lhs <= sum_j c_j term_j``.

    ``worst_margin`` is the smallest ``rhs - lhs``. Prescribed-constant
    checks pass when it is at least ``-tolerance``; fitted checks pass when
    the fit is feasible, its constants are finite and they are stable under
    doubling the family (see ``extra['stable']``).
    """

    lemma: str
    seed: int | None
    grid: dict
    constants: list[float]
    term_labels: list[str]
    samples: list[dict]
    worst_margin: float
    passed: bool
    tolerance: float
    constant_kind: str = "fitted"
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable({
            "lemma": self.lemma,
            "seed": self.seed,
            "grid": self.grid,
            "constants": list(self.constants),
            "constant_kind": self.constant_kind,
            "term_labels": list(self.term_labels),
            "worst_margin": self.worst_margin,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "notes": list(self.notes),
            "extra": self.extra,
            "samples": self.samples,
        })

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


@dataclass
class StructuralReport:
    """Outcome of a non-inequality check (metric axioms, sequence decay, sandwich)."""

    check: str
    seed: int | None
    grid: dict
    passed: bool
    details: dict = field(default_factory=dict)
    samples: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return jsonable({
            "lemma": self.check,
            "seed": self.seed,
            "grid": self.grid,
            "pass": self.passed,
            "details": self.details,
            "notes": list(self.notes),
            "samples": self.samples,
        })

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


@dataclass(frozen=True)
class AdmissibilityDecision:
    """Which case of an embedding theorem applies and the resulting range of p.

    ``relation`` is the comparison ``p <relation> threshold`` required for
    admissibility: ``'>'`` or ``'>='`` for lower thresholds, ``'<'`` or
    ``'<='`` for upper ones. ``lower_bound`` is an additional ``p >= bound``
    requirement (the ``1 <= p`` of upper-threshold cases).
    """

    theorem: str
    inputs: dict
    case: str
    threshold: float
    relation: str
    lower_bound: float | None = None
    p: float | None = None

    def admits(self, p: float) -> bool:
        ops = {
            ">": p > self.threshold,
            ">=": p >= self.threshold,
            "<": p < self.threshold,
            "<=": p <= self.threshold,
        }
        ok = ops[self.relation]
        if self.lower_bound is not None:
            ok = ok and p >= self.lower_bound
        return bool(ok)

    @property
    def admissible(self) -> bool | None:
        return None if self.p is None else self.admits(self.p)

    def describe(self) -> str:
        lo = f"{self.lower_bound:g} <= " if self.lower_bound is not None else ""
        return f"case ({self.case}): {lo}p {self.relation} {self.threshold!r}"

    def to_dict(self) -> dict:
        return jsonable({
            "theorem": self.theorem,
            "inputs": self.inputs,
            "case": self.case,
            "threshold": self.threshold,
            "relation": self.relation,
            "lower_bound": self.lower_bound,
            "p": self.p,
            "admissible": self.admissible,
        })

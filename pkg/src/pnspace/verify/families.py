"""Deterministic seeded families of smooth test functions."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .. import exprlang
from ..grid import Grid, GridFunction, enforce_vanishing_boundary

__all__ = ["FunctionFamily", "KINDS"]

KINDS = ("trig_bumps", "polynomial", "bump_products", "user_list")
_ALIASES = {
    "trig": "trig_bumps",
    "poly": "polynomial",
    "bump": "bump_products",
    "bumps": "bump_products",
    "list": "user_list",
    "user": "user_list",
}
# offsets that derive independent companion streams from one seed
_COMPANION_SALT = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class FunctionFamily:
    """``count`` functions on ``grid`` drawn from a seeded generator.

    Member ``i`` depends only on ``(kind, seed, i, grid, amplitude,
    vanishing)``, so a family of ``2n`` members starts with the ``n``
    members of the smaller one.

    Parameters
    ----------
    grid : Grid
    kind : str
        ``'trig_bumps'``, ``'polynomial'``, ``'bump_products'`` or
        ``'user_list'`` (short aliases ``trig``, ``poly``, ``bump``, ``list``).
    seed : int
        Any integer representable in 64 bits.
    count : int
    amplitude : (float, float)
        Range of the random amplitude; the sign is random as well.
    vanishing : bool
        Members vanish on the boundary (smoothly, then exactly at the nodes).
    expressions : tuple of str
        Members of a ``user_list`` family, cycled if ``count`` is larger.
    """

    grid: Grid
    kind: str = "trig_bumps"
    seed: int = 0
    count: int = 100
    amplitude: tuple[float, float] = (0.25, 2.0)
    vanishing: bool = False
    expressions: tuple[str, ...] = ()

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "expressions", tuple(self.expressions))
        object.__setattr__(self, "amplitude", tuple(float(a) for a in self.amplitude))
        if kind == "user_list" and not self.expressions:
            raise ValueError("user_list family needs at least one expression")
        if self.count < 1:
            raise ValueError("family count must be positive")
        lo, hi = self.amplitude
        if not 0 < lo <= hi:
            raise ValueError(f"amplitude range must satisfy 0 < lo <= hi, got {self.amplitude}")

    @classmethod
    def from_spec(cls, text: str, grid: Grid) -> FunctionFamily:
        """Parse ``"trig:seed=7:count=100"``.

        Recognized keys: ``seed``, ``count``, ``amp=lo,hi``, ``vanishing=0|1``
        and, for ``list``, ``exprs=e1;e2;...``.
        """
        head, *parts = text.split(":")
        kwargs: dict = {"kind": head.strip()}
        for part in parts:
            if not part:
                continue
            key, sep, val = part.partition("=")
            if not sep:
                raise ValueError(f"family option {part!r} is not key=value")
            key = key.strip()
            if key == "seed":
                kwargs["seed"] = int(val)
            elif key == "count":
                kwargs["count"] = int(val)
            elif key in ("amp", "amplitude"):
                lo, hi = (float(s) for s in val.split(","))
                kwargs["amplitude"] = (lo, hi)
            elif key == "vanishing":
                kwargs["vanishing"] = val.strip().lower() in ("1", "true", "yes")
            elif key == "exprs":
                kwargs["expressions"] = tuple(e for e in val.split(";") if e.strip())
            else:
                raise ValueError(f"unknown family option {key!r}")
        if kwargs["kind"] in ("list", "user", "user_list") and "count" not in kwargs:
            kwargs["count"] = len(kwargs.get("expressions", ())) or 1
        return cls(grid, **kwargs)

    def with_count(self, count: int) -> FunctionFamily:
        return dataclasses.replace(self, count=count)

    def doubled(self) -> FunctionFamily:
        return self.with_count(2 * self.count)

    def with_grid(self, grid: Grid) -> FunctionFamily:
        return dataclasses.replace(self, grid=grid)

    def companion(self, k: int = 1) -> FunctionFamily:
        """Same generator with an independent seed stream."""
        seed = (self.seed + k * _COMPANION_SALT) % 2**64
        return dataclasses.replace(self, seed=seed)

    def member(self, i: int) -> GridFunction:
        if self.kind == "user_list":
            expr = self.expressions[i % len(self.expressions)]
            u = exprlang.sample(expr, self.grid)
        else:
            rng = np.random.default_rng([self.seed % 2**64, i])
            xi = _normalized_coords(self.grid)
            gen = {"trig_bumps": _trig, "polynomial": _poly, "bump_products": _bumps}[self.kind]
            values = gen(rng, xi, self.vanishing)
            amp = rng.uniform(*self.amplitude) * rng.choice([-1.0, 1.0])
            u = GridFunction(self.grid, amp * values)
        if self.vanishing:
            u = enforce_vanishing_boundary(u)
        return u

    def members(self) -> list[GridFunction]:
        return [self.member(i) for i in range(self.count)]

    def __iter__(self):
        return iter(self.members())

    def __len__(self):
        return self.count

    def describe(self) -> dict:
        d = {
            "kind": self.kind,
            "seed": self.seed,
            "count": self.count,
            "amplitude": list(self.amplitude),
            "vanishing": self.vanishing,
        }
        if self.expressions:
            d["expressions"] = list(self.expressions)
        return d


def _normalized_coords(grid: Grid) -> tuple[np.ndarray, ...]:
    return tuple((c - a) / (b - a) for c, (a, b) in zip(grid.coords, grid.bounds))


def _unit_l1(c: np.ndarray) -> np.ndarray:
    s = np.sum(np.abs(c))
    return c / s if s > 0 else c


def _bubble(xi) -> np.ndarray:
    out = 1.0
    for x in xi:
        out = out * 4.0 * x * (1.0 - x)
    return out


def _trig(rng, xi, vanishing):
    nterms = int(rng.integers(1, 5))
    coef = _unit_l1(rng.normal(size=nterms))
    out = 0.0
    for c in coef:
        term = c
        for x in xi:
            k = int(rng.integers(1, 7))
            phase = 0.0 if vanishing else rng.uniform(0.0, 2.0 * np.pi)
            term = term * np.sin(k * np.pi * x + phase)
        out = out + term
    if not vanishing:
        out = out + rng.uniform(-0.5, 0.5)
    return np.broadcast_to(out, xi[0].shape)


def _poly(rng, xi, vanishing):
    degree = int(rng.integers(1, 6))
    dim = len(xi)
    powers = [(i,) for i in range(degree + 1)] if dim == 1 else [
        (i, j) for i in range(degree + 1) for j in range(degree + 1 - i)
    ]
    coef = _unit_l1(rng.normal(size=len(powers)))
    out = 0.0
    for c, pw in zip(coef, powers):
        term = c
        for x, k in zip(xi, pw):
            term = term * (2.0 * x - 1.0) ** k
        out = out + term
    if vanishing:
        out = out * _bubble(xi)
    return np.broadcast_to(out, xi[0].shape)


def _bumps(rng, xi, vanishing):
    nbumps = int(rng.integers(1, 5))
    coef = _unit_l1(rng.normal(size=nbumps))
    out = 0.0
    for c in coef:
        term = c
        for x in xi:
            center = rng.uniform(0.1, 0.9)
            width = rng.uniform(0.05, 0.3)
            term = term * np.exp(-0.5 * ((x - center) / width) ** 2)
        out = out + term
    if vanishing:
        out = out * _bubble(xi)
    return np.broadcast_to(out, xi[0].shape)

"""Uniform box grids, sampled functions, finite differences and quadrature.

Every integral over the domain is realized by the tensor-product trapezoidal
rule and every derivative by second-order finite differences, so refinement
studies see a single convergence rate.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import AxisOutOfRange, InvalidDomain

__all__ = [
    "Grid",
    "GridFunction",
    "ExponentField",
    "BoundaryTrace",
    "make_grid",
    "diff",
    "diff2",
    "diff_mixed",
    "gradient_magnitude",
    "integrate",
    "boundary_trace",
    "integrate_boundary",
    "enforce_vanishing_boundary",
    "as_field",
    "write_csv",
    "read_csv",
]


@dataclass(frozen=True)
class Grid:
    """Axis-aligned box ``[a_0, b_0] x ... `` with a uniform node lattice.

    Use :func:`make_grid` to build one; it validates the bounds.
    """

    bounds: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.resolution)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.resolution

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (b - a) / (n - 1) for (a, b), n in zip(self.bounds, self.resolution)
        )

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """Node coordinates ``a_i + k h_i`` along each axis."""
        out = []
        for (a, _), n, h in zip(self.bounds, self.resolution, self.spacing):
            x = a + np.arange(n) * h
            x.flags.writeable = False
            out.append(x)
        return tuple(out)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape :attr:`shape` (``ij`` indexing)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        for m in mesh:
            m.flags.writeable = False
        return tuple(mesh)

    @property
    def measure(self) -> float:
        """Lebesgue measure of the box."""
        return float(np.prod([b - a for a, b in self.bounds]))

    @property
    def boundary_measure(self) -> float:
        """Counting measure of the two endpoints in 1D, perimeter in 2D."""
        if self.dim == 1:
            return 2.0
        (a0, b0), (a1, b1) = self.bounds
        return 2.0 * ((b0 - a0) + (b1 - a1))

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights, one per node."""
        w = np.ones(())
        for n, h in zip(self.resolution, self.spacing):
            w = np.multiply.outer(w, _trapezoid_weights(n, h))
        w.flags.writeable = False
        return w

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[axis] = 0
            mask[tuple(idx)] = True
            idx[axis] = -1
            mask[tuple(idx)] = True
        mask.flags.writeable = False
        return mask

    def refined(self, factor: int = 2) -> Grid:
        """Grid with spacing divided by ``factor`` on every axis."""
        return make_grid(
            self.dim, self.bounds, [factor * (n - 1) + 1 for n in self.resolution]
        )

    def describe(self) -> dict:
        return {
            "dim": self.dim,
            "bounds": [list(b) for b in self.bounds],
            "resolution": list(self.resolution),
        }


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def make_grid(dim: int, bounds, resolution) -> Grid:
    """Build a :class:`Grid`.

    Parameters
    ----------
    dim : int
        1 or 2.
    bounds : sequence
        ``[a, b]`` in 1D or ``[[a0, b0], [a1, b1]]`` in 2D. A flat list of
        ``2 * dim`` numbers is accepted as well.
    resolution : int or sequence of int
        Nodes per axis, at least 3. A scalar is used for every axis.

    Raises
    ------
    InvalidDomain
        If ``dim`` is not 1 or 2, any ``a_i >= b_i`` or any ``N_i < 3``.
    """
    if dim not in (1, 2):
        raise InvalidDomain(f"dim must be 1 or 2, got {dim}")
    flat = np.asarray(bounds, dtype=float).ravel()
    if flat.size != 2 * dim:
        raise InvalidDomain(f"expected {2 * dim} bound values, got {flat.size}")
    pairs = tuple((float(flat[2 * i]), float(flat[2 * i + 1])) for i in range(dim))
    res = np.atleast_1d(np.asarray(resolution))
    if res.size == 1:
        res = np.repeat(res, dim)
    if res.size != dim:
        raise InvalidDomain(f"expected {dim} resolutions, got {res.size}")
    if not np.all(np.isfinite(flat)):
        raise InvalidDomain("bounds must be finite")
    for a, b in pairs:
        if not a < b:
            raise InvalidDomain(f"degenerate interval [{a}, {b}]")
    out = []
    for n in res:
        if int(n) != n or n < 3:
            raise InvalidDomain(f"resolution must be an integer >= 3, got {n}")
        out.append(int(n))
    return Grid(pairs, tuple(out))


class GridFunction:
    """Real values sampled at the nodes of a :class:`Grid`.

    Instances are immutable; arithmetic returns new objects.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        arr = np.array(values, dtype=float)
        if arr.ndim == 0:
            arr = np.full(grid.shape, float(arr))
        elif arr.size == grid.size and arr.shape != grid.shape:
            arr = arr.reshape(grid.shape)
        if arr.shape != grid.shape:
            raise ValueError(
                f"values of shape {arr.shape} do not match grid shape {grid.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid function values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., np.ndarray]):
        """Sample ``func(*coords)`` on ``grid``."""
        return cls(grid, np.broadcast_to(func(*grid.coords), grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float):
        return cls(grid, np.full(grid.shape, float(c)))

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / self._other(other))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.grid.shape})"

    def allclose(self, other, rtol=1e-12, atol=0.0) -> bool:
        return bool(np.allclose(self.values, self._other(other), rtol=rtol, atol=atol))


class ExponentField(GridFunction):
    """Exponent sampled on a grid, bounded between ``lower`` and ``upper``.

    ``floor`` is the smallest admissible nodal value: 1 for the class of
    bounded exponents used by Lebesgue modulars, 0 for weight exponents such
    as the power on ``|u|`` in mixed modulars.
    """

    __slots__ = ("lower", "upper", "floor")

    def __init__(self, grid: Grid, values, floor: float = 1.0):
        super().__init__(grid, values)
        if np.any(self.values < floor):
            raise ValueError(
                f"exponent field has nodes below {floor}: min {self.values.min()!r}"
            )
        object.__setattr__(self, "floor", float(floor))
        object.__setattr__(self, "lower", float(self.values.min()))
        object.__setattr__(self, "upper", float(self.values.max()))

    @classmethod
    def constant(cls, grid: Grid, c: float, floor: float = 1.0):
        return cls(grid, np.full(grid.shape, float(c)), floor=floor)

    @property
    def is_constant(self) -> bool:
        return self.lower == self.upper


def as_field(value, grid: Grid, floor: float = 1.0) -> ExponentField:
    """Coerce a number, :class:`GridFunction` or :class:`ExponentField`."""
    if isinstance(value, ExponentField):
        if value.grid != grid:
            raise ValueError("exponent field lives on a different grid")
        if value.lower < floor:
            raise ValueError(f"exponent field has nodes below {floor}")
        return value
    if isinstance(value, GridFunction):
        if value.grid != grid:
            raise ValueError("exponent field lives on a different grid")
        return ExponentField(grid, value.values, floor=floor)
    return ExponentField.constant(grid, float(value), floor=floor)


def _check_axis(u: GridFunction, axis: int) -> None:
    if not 0 <= axis < u.grid.dim:
        raise AxisOutOfRange(f"axis {axis} out of range for {u.grid.dim}D grid")


def diff(u: GridFunction, axis: int = 0) -> GridFunction:
    """First derivative along ``axis``.

    Central differences in the interior, second-order one-sided stencils at
    the two boundary nodes; exact on quadratics.
    """
    _check_axis(u, axis)
    h = u.grid.spacing[axis]
    return GridFunction(u.grid, np.gradient(u.values, h, axis=axis, edge_order=2))


def diff2(u: GridFunction, axis: int = 0) -> GridFunction:
    """Second derivative along ``axis`` (exact on cubics in the interior)."""
    _check_axis(u, axis)
    h = u.grid.spacing[axis]
    v = np.moveaxis(u.values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = v[:-2] - 2.0 * v[1:-1] + v[2:]
    if v.shape[0] >= 4:
        out[0] = 2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]
        out[-1] = 2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]
    else:
        # three nodes: the only stencil available, still exact on quadratics
        out[0] = out[-1] = out[1]
    out /= h * h
    return GridFunction(u.grid, np.moveaxis(out, 0, axis))


def diff_mixed(u: GridFunction) -> GridFunction:
    """Mixed partial ``D_1 D_2 u`` on a 2D grid."""
    if u.grid.dim != 2:
        raise AxisOutOfRange("mixed partial needs a 2D grid")
    return diff(diff(u, 0), 1)


def gradient_magnitude(u: GridFunction) -> GridFunction:
    """Nodewise Euclidean norm of the finite-difference gradient."""
    sq = sum(diff(u, i).values ** 2 for i in range(u.grid.dim))
    return GridFunction(u.grid, np.sqrt(sq))


def integrate(f) -> float:
    """Tensor-product trapezoidal rule over the whole grid."""
    return float(np.sum(f.grid.weights * f.values))


@dataclass(frozen=True)
class BoundaryTrace:
    """Values of a grid function on the faces of the box.

    ``faces`` holds two one-element arrays in 1D (left, right endpoint) and
    four edge arrays in 2D ordered ``x=a0, x=b0, y=a1, y=b1``.
    """

    grid: Grid
    faces: tuple[np.ndarray, ...]

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> BoundaryTrace:
        return BoundaryTrace(self.grid, tuple(np.asarray(func(f)) for f in self.faces))

    def abs_power(self, exponent: float) -> BoundaryTrace:
        return self.map(lambda f: np.abs(f) ** exponent)

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(f)) for f in self.faces))


def boundary_trace(u: GridFunction) -> BoundaryTrace:
    v = u.values
    if u.grid.dim == 1:
        faces = (v[:1].copy(), v[-1:].copy())
    else:
        faces = (v[0, :].copy(), v[-1, :].copy(), v[:, 0].copy(), v[:, -1].copy())
    return BoundaryTrace(u.grid, faces)


def integrate_boundary(t: BoundaryTrace) -> float:
    """Integral over the boundary.

    In 1D the boundary carries counting measure (sum of endpoint values).
    In 2D each edge is integrated by the trapezoidal rule, so a corner gets
    half a cell from each of its two edges.
    """
    if t.grid.dim == 1:
        return float(t.faces[0][0] + t.faces[1][0])
    h0, h1 = t.grid.spacing
    n0, n1 = t.grid.resolution
    w_along_y = _trapezoid_weights(n1, h1)
    w_along_x = _trapezoid_weights(n0, h0)
    left, right, bottom, top = t.faces
    return float(
        np.dot(w_along_y, left)
        + np.dot(w_along_y, right)
        + np.dot(w_along_x, bottom)
        + np.dot(w_along_x, top)
    )


def enforce_vanishing_boundary(u: GridFunction) -> GridFunction:
    """Copy of ``u`` with every boundary node set to zero."""
    v = np.array(u.values)
    v[u.grid.boundary_mask] = 0.0
    return GridFunction(u.grid, v)


# --- CSV ---------------------------------------------------------------------

_AXIS_NAMES = ("x", "y")


def write_csv(u: GridFunction, target) -> None:
    """Write ``x[,y],value`` rows in row-major node order, 17 significant digits."""
    header = list(_AXIS_NAMES[: u.grid.dim]) + ["value"]
    cols = [c.ravel() for c in u.grid.coords] + [u.values.ravel()]

    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([format(float(x), ".17g") for x in row])

    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", newline="") as fh:
            _emit(fh)
    else:
        _emit(target)


def read_csv(source, grid: Grid | None = None) -> GridFunction:
    """Read a grid function written by :func:`write_csv`.

    Without ``grid`` the lattice is rebuilt from the first/last coordinate and
    node count of each axis. With ``grid`` the coordinates are validated
    against it.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
    else:
        rows = list(csv.reader(source))
    header, body = rows[0], rows[1:]
    dim = len(header) - 1
    if dim not in (1, 2) or header != list(_AXIS_NAMES[:dim]) + ["value"]:
        raise ValueError(f"unexpected CSV header {header}")
    data = np.array([[float(x) for x in r] for r in body])
    coords = data[:, :dim]
    if grid is None:
        bounds, res = [], []
        for i in range(dim):
            uniq = np.unique(coords[:, i])
            bounds.append((uniq[0], uniq[-1]))
            res.append(uniq.size)
        grid = make_grid(dim, bounds, res)
    if coords.shape[0] != grid.size:
        raise ValueError("row count does not match grid")
    expected = np.stack([c.ravel() for c in grid.coords], axis=1)
    scale = max(abs(v) for pair in grid.bounds for v in pair) or 1.0
    if not np.allclose(coords, expected, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("CSV coordinates do not match the grid lattice")
    return GridFunction(grid, data[:, dim].reshape(grid.shape))


Number = Union[int, float]
ExponentLike = Union[Number, GridFunction, ExponentField]
BoundsLike = Sequence[float]

"""Numerical toolkit for pn-spaces and variable-exponent function spaces.

Subpackages and modules:

* :mod:`pnspace.grid` uniform grids, grid functions, finite differences, quadrature
* :mod:`pnspace.exprlang` a small expression language for functions and exponents
* :mod:`pnspace.modulars` modulars of the constant and variable exponent spaces
* :mod:`pnspace.norms` Luxemburg norms, pseudo-norms and metrics
* :mod:`pnspace.transforms` the signed-power maps carrying pn-spaces to Sobolev spaces
* :mod:`pnspace.verify` seeded inequality checks and admissibility deciders
* :mod:`pnspace.studies` truncation studies and 1D identities
"""

from . import errors, exprlang, grid, modulars, norms, studies, transforms, verify
from .grid import ExponentField, Grid, GridFunction, make_grid
from .modulars import SpaceSpec, pn_modular
from .norms import NormResult, luxemburg_norm, pn_pseudonorm

__version__ = "0.1.0"

__all__ = [
    "ExponentField",
    "Grid",
    "GridFunction",
    "NormResult",
    "SpaceSpec",
    "errors",
    "exprlang",
    "grid",
    "luxemburg_norm",
    "make_grid",
    "modulars",
    "norms",
    "pn_modular",
    "pn_pseudonorm",
    "studies",
    "transforms",
    "verify",
]

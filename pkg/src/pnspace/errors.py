"""Exception hierarchy shared by all pnspace modules."""

from __future__ import annotations


class PnSpaceError(Exception):
    """Base class for every error raised by pnspace."""


class InvalidDomain(PnSpaceError, ValueError):
    """Degenerate box bounds or too few nodes."""


class AxisOutOfRange(PnSpaceError, IndexError):
    """Differentiation axis does not exist on the grid."""


class ParseError(PnSpaceError, ValueError):
    """Malformed expression text.

    Attributes
    ----------
    offset : int
        Byte offset into the UTF-8 encoded source where parsing failed.
    expected : frozenset of str
        Token kinds that would have been accepted at ``offset``.
    """

    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class EvalError(PnSpaceError, ValueError):
    """Expression evaluated outside its domain (ln of 0, negative base, ...)."""


class UnsupportedOrder(PnSpaceError, ValueError):
    """Derivative order above 2 requested."""


class NoConvergence(PnSpaceError, RuntimeError):
    """Infimum solver exhausted its iteration budget."""


class Infeasible(PnSpaceError, ValueError):
    """Constant-fitting LP has no solution.

    Attributes
    ----------
    row : int
        Index of the sample whose constraint cannot be met.
    """

    def __init__(self, message: str, row: int):
        self.row = row
        super().__init__(f"{message} (row {row})")


class FitAmbiguous(PnSpaceError, RuntimeError):
    """Two growth models explain a refinement sequence equally well."""


class HypothesisError(PnSpaceError, ValueError):
    """Inputs fall outside the hypotheses of the statement being checked."""


class HypothesisViolated(HypothesisError):
    """Exponent relations required by a lemma fail."""


class ConditionViolated(HypothesisError):
    """A nodewise condition on exponent fields fails."""


class ConjugacyViolated(HypothesisError):
    """Exponents are not Hoelder conjugate."""


class NotAdmissible(HypothesisError):
    """Embedding exponent lies outside the admissible range."""

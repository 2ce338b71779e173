"""A small closed-form expression language for test functions and exponents.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are the variables ``x`` and ``y``, the constants ``pi`` and ``e``, and
the functions ``abs ln exp sin cos sqrt pow min max spow``. ``spow(t, a)`` is
the odd power ``|t|^a sign(t)``; plain ``^`` refuses a negative base with a
non-integer exponent.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ParseError
from .grid import Grid, GridFunction

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "to_text",
    "evaluate",
    "sample",
    "variables",
]


class Expr:
    """Base class of expression tree nodes."""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]


VARIABLES = ("x", "y")
CONSTANTS = {"pi": math.pi, "e": math.e}
# name -> (min arity, max arity); None means variadic
FUNCTIONS = {
    "abs": (1, 1),
    "ln": (1, 1),
    "exp": (1, 1),
    "sin": (1, 1),
    "cos": (1, 1),
    "sqrt": (1, 1),
    "pow": (2, 2),
    "spow": (2, 2),
    "min": (2, None),
    "max": (2, None),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_ATOM_START = frozenset({"number", "name", "("})
_UNARY_START = _ATOM_START | {"-", "+"}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number', 'name', an operator character, or 'end'
    text: str
    pos: int  # character offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                _byte_offset(text, pos),
                _UNARY_START,
            )
        kind = m.lastgroup
        if kind != "ws":
            tok_kind = m.group() if kind == "op" else kind
            tokens.append(_Token(tok_kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def fail(self, message: str, expected) -> ParseError:
        return ParseError(message, _byte_offset(self.text, self.tok.pos), expected)

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            raise self.fail(f"unexpected {self._describe()}", {kind})
        return self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.fail(f"unexpected {self._describe()}", {"+", "-", "*", "/", "^", "end"})
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok.kind == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Num(float(t.text))
        if t.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            return self.name()
        raise self.fail(f"unexpected {self._describe()}", _UNARY_START)

    def name(self) -> Expr:
        t = self.advance()
        if t.text in FUNCTIONS:
            if self.tok.kind != "(":
                raise self.fail(f"function {t.text!r} needs arguments", {"("})
            self.advance()
            args = [self.expr()]
            while self.tok.kind == ",":
                self.advance()
                args.append(self.expr())
            self.expect(")")
            lo, hi = FUNCTIONS[t.text]
            if len(args) < lo or (hi is not None and len(args) > hi):
                raise ParseError(
                    f"{t.text} takes {lo if hi == lo else f'at least {lo}'} "
                    f"argument(s), got {len(args)}",
                    _byte_offset(self.text, t.pos),
                )
            return Call(t.text, tuple(args))
        if t.text in VARIABLES:
            return Var(t.text)
        if t.text in CONSTANTS:
            return Num(CONSTANTS[t.text])
        self.i -= 1
        raise self.fail(f"unknown name {t.text!r}", set(VARIABLES) | set(CONSTANTS) | set(FUNCTIONS))


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ParseError
        On empty or malformed input; carries the byte offset and the set of
        acceptable tokens.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0, _UNARY_START)
    return _Parser(text).parse()


def to_text(e: Expr) -> str:
    """Fully parenthesized source text that parses back to the same tree."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        out = frozenset()
        for a in e.args:
            out |= variables(a)
        return out
    return frozenset()


def _where(mask: np.ndarray, env: dict) -> str:
    idx = np.argwhere(np.atleast_1d(mask))[0]
    parts = []
    for name, arr in env.items():
        arr = np.atleast_1d(np.asarray(arr))
        if arr.shape == np.atleast_1d(mask).shape:
            parts.append(f"{name}={arr[tuple(idx)]!r}")
    return ", ".join(parts) if parts else "constant expression"


def _power(base, expo, env):
    base, expo = np.broadcast_arrays(np.asarray(base, float), np.asarray(expo, float))
    bad = (base < 0) & (expo != np.round(expo))
    if np.any(bad):
        raise EvalError(
            f"negative base with non-integer exponent at {_where(bad, env)}; "
            "use spow(t, a) for the odd power"
        )
    bad = (base == 0) & (expo < 0)
    if np.any(bad):
        raise EvalError(f"zero raised to a negative power at {_where(bad, env)}")
    return np.power(base, expo)


def _eval(e: Expr, env: dict):
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        if e.name not in env:
            raise EvalError(f"variable {e.name!r} is not available on this grid")
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, env)
        b = _eval(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            bad = np.broadcast_to(b == 0, np.broadcast(a, b).shape)
            if np.any(bad):
                raise EvalError(f"division by zero at {_where(bad, env)}")
            return a / b
        if e.op == "^":
            return _power(a, b, env)
    if isinstance(e, Call):
        args = [_eval(a, env) for a in e.args]
        name = e.name
        if name == "abs":
            return np.abs(args[0])
        if name == "ln":
            bad = np.asarray(args[0]) <= 0
            if np.any(bad):
                raise EvalError(f"ln of non-positive value at {_where(bad, env)}")
            return np.log(args[0])
        if name == "sqrt":
            bad = np.asarray(args[0]) < 0
            if np.any(bad):
                raise EvalError(f"sqrt of negative value at {_where(bad, env)}")
            return np.sqrt(args[0])
        if name == "exp":
            return np.exp(args[0])
        if name == "sin":
            return np.sin(args[0])
        if name == "cos":
            return np.cos(args[0])
        if name == "pow":
            return _power(args[0], args[1], env)
        if name == "spow":
            t, a = np.broadcast_arrays(np.asarray(args[0], float), np.asarray(args[1], float))
            bad = (t == 0) & (a < 0)
            if np.any(bad):
                raise EvalError(f"spow of zero with negative exponent at {_where(bad, env)}")
            return np.sign(t) * np.power(np.abs(t), a)
        if name == "min":
            return np.minimum.reduce(np.broadcast_arrays(*args))
        if name == "max":
            return np.maximum.reduce(np.broadcast_arrays(*args))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, **env) -> np.ndarray:
    """Evaluate ``e`` with variables bound to arrays (or scalars).

    Raises
    ------
    EvalError
        On a domain violation or a non-finite result.
    """
    env = {k: np.asarray(v, dtype=float) for k, v in env.items()}
    with np.errstate(all="ignore"):
        out = np.asarray(_eval(e, env), dtype=float)
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise EvalError(f"non-finite value at {_where(bad, env)}")
    return out


def sample(e: Expr | str, grid: Grid) -> GridFunction:
    """Evaluate ``e`` at every node of ``grid``."""
    if isinstance(e, str):
        e = parse(e)
    allowed = set(VARIABLES[: grid.dim])
    extra = variables(e) - allowed
    if extra:
        raise EvalError(
            f"expression uses {sorted(extra)} but a {grid.dim}D grid only has {sorted(allowed)}"
        )
    env = dict(zip(VARIABLES, grid.coords))
    values = np.broadcast_to(evaluate(e, **env), grid.shape)
    return GridFunction(grid, values)

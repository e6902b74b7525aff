"""Expression language: symbol tables, immutable trees, prefix syntax, evaluation.

Expressions are trees over a fixed symbol set: the variables x, y, z; a small
pool of named constants; two-digit decimal constants in [-3.14, 3.14]; five
binary operators; and a family of unary functions (trig, inverse trig,
hyperbolic, inverse hyperbolic, exp, log, sqrt, unary minus).

The canonical text form is fully parenthesized prefix notation, one expression
per line, e.g. ``(+ (pow (sin x) 2) (pow (cos x) 2))``.  Decimals print as
``(dec NN)`` where NN is the value scaled by 100; the exact rational one-half
prints as ``(const 1/2)`` and is a distinct token from the decimal ``(dec 50)``.

Evaluation is IEEE float64 over the reals.  Leaving the real domain (asin of
2, log of a negative, division by zero, ...) yields a ``domain_error`` result
carrying the path of the offending node; any non-finite intermediate yields
``overflow``.  A finite result is guaranteed to be a real, non-NaN float.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

Path = tuple[int, ...]

UNARY_OPS: frozenset[str] = frozenset((
    "neg",
    "sin", "cos", "tan", "cot", "sec", "csc",
    "asin", "acos", "atan", "acot", "asec", "acsc",
    "sinh", "cosh", "tanh", "coth", "sech", "csch",
    "asinh", "acosh", "atanh", "acoth", "asech", "acsch",
    "exp", "log", "sqrt",
))

BINARY_OPS: frozenset[str] = frozenset(("+", "*", "pow", "-", "/"))

VARIABLES: frozenset[str] = frozenset(("x", "y", "z"))

# Named constants, by canonical token.  Decimals are a separate family with
# names of the form "dec:<scaled>", where <scaled> is the value times 100.
INT_CONSTANT_NAMES: tuple[str, ...] = ("-1", "0", "1", "2", "3", "4", "10")
PI_NAME = "pi"
HALF_NAME = "1/2"
NAMED_CONSTANTS: frozenset[str] = frozenset(INT_CONSTANT_NAMES) | {PI_NAME, HALF_NAME}

DECIMAL_SCALE = 100
DECIMAL_LIMIT = 314  # |scaled value| bound, i.e. [-3.14, 3.14]

# Input-only aliases; canonical output never uses them.
_VAR_ALIASES = {"θ": "x"}
_CONST_ALIASES = {"Pi": "pi", "π": "pi"}


class ParseError(ValueError):
    """Syntax or vocabulary error in prefix text, with a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class PathError(ValueError):
    """A path does not address a node of the given expression."""


class UnboundVariableError(KeyError):
    """Evaluation environment is missing a free variable."""


@dataclass(frozen=True, slots=True)
class Symbol:
    kind: str  # "const" | "var" | "unary" | "binary"
    name: str


@dataclass(frozen=True, slots=True)
class Expr:
    """Immutable expression tree node.

    ``kind`` is one of "const", "var", "unary", "binary"; ``name`` is the
    canonical token (operator name, variable name, or constant token).
    Structural equality is exact, so ``(const 1/2)`` and ``(dec 50)`` are
    different expressions even though they evaluate to the same float.
    """

    kind: str
    name: str
    args: tuple["Expr", ...] = ()

    def __post_init__(self) -> None:
        arity = _ARITY.get(self.kind)
        if arity is None:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.args) != arity:
            raise ValueError(
                f"{self.kind} node {self.name!r} takes {arity} children, got {len(self.args)}"
            )
        if self.kind == "unary" and self.name not in UNARY_OPS:
            raise ValueError(f"unknown unary operator {self.name!r}")
        if self.kind == "binary" and self.name not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.name!r}")
        if self.kind == "var" and self.name not in VARIABLES:
            raise ValueError(f"unknown variable {self.name!r}")
        if self.kind == "const" and self.name not in NAMED_CONSTANTS:
            if not self.name.startswith("dec:"):
                raise ValueError(f"unknown constant {self.name!r}")
            scaled = int(self.name[4:])
            if abs(scaled) > DECIMAL_LIMIT:
                raise ValueError(f"decimal constant {scaled / 100} out of range")

    @property
    def symbol(self) -> Symbol:
        return Symbol(self.kind, self.name)

    def is_leaf(self) -> bool:
        return not self.args


_ARITY = {"const": 0, "var": 0, "unary": 1, "binary": 2}


def var(name: str) -> Expr:
    return Expr("var", name)


def const(name: str) -> Expr:
    """Named constant by canonical token ("-1" .. "10", "pi", "1/2")."""
    return Expr("const", name)


def const_int(n: int) -> Expr:
    if str(n) not in INT_CONSTANT_NAMES:
        raise ValueError(f"{n} is not a named integer constant")
    return Expr("const", str(n))


def const_dec(scaled: int) -> Expr:
    """Two-digit decimal constant from its value scaled by 100."""
    return Expr("const", f"dec:{scaled}")


PI = const(PI_NAME)
HALF = const(HALF_NAME)


def unary(op: str, a: Expr) -> Expr:
    return Expr("unary", op, (a,))


def binary(op: str, a: Expr, b: Expr) -> Expr:
    return Expr("binary", op, (a, b))


def const_fraction(e: Expr) -> Fraction | None:
    """Exact rational value of a constant node; None for pi or non-constants."""
    if e.kind != "const":
        return None
    name = e.name
    if name == PI_NAME:
        return None
    if name == HALF_NAME:
        return Fraction(1, 2)
    if name.startswith("dec:"):
        return Fraction(int(name[4:]), DECIMAL_SCALE)
    return Fraction(int(name))


# ---------------------------------------------------------------------------
# Equations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Equation:
    """Ordered pair of expressions joined by the root equality.

    Paths into an equation start with 0 (left side) or 1 (right side).
    """

    lhs: Expr
    rhs: Expr

    def sides(self) -> tuple[Expr, Expr]:
        return (self.lhs, self.rhs)

    def free_variables(self) -> frozenset[str]:
        return free_variables(self.lhs) | free_variables(self.rhs)

    def positions(self) -> list[tuple[Path, Expr]]:
        out: list[tuple[Path, Expr]] = []
        for side_ix, side in ((0, self.lhs), (1, self.rhs)):
            for path, node in positions(side):
                out.append(((side_ix,) + path, node))
        return out

    def at(self, path: Path) -> Expr:
        if not path or path[0] not in (0, 1):
            raise PathError(f"equation path must start with 0 or 1: {path}")
        side = self.lhs if path[0] == 0 else self.rhs
        return subexpr_at(side, path[1:])

    def replace_at(self, path: Path, sub: Expr) -> "Equation":
        if not path or path[0] not in (0, 1):
            raise PathError(f"equation path must start with 0 or 1: {path}")
        if path[0] == 0:
            return Equation(replace_at(self.lhs, path[1:], sub), self.rhs)
        return Equation(self.lhs, replace_at(self.rhs, path[1:], sub))

    def node_count(self) -> int:
        return node_count(self.lhs) + node_count(self.rhs)


# ---------------------------------------------------------------------------
# Tree utilities
# ---------------------------------------------------------------------------

def free_variables(e: Expr) -> frozenset[str]:
    if e.kind == "var":
        return frozenset((e.name,))
    if not e.args:
        return frozenset()
    out: frozenset[str] = frozenset()
    for a in e.args:
        out |= free_variables(a)
    return out


def node_count(e: Expr) -> int:
    n = 1
    for a in e.args:
        n += node_count(a)
    return n


def depth(e: Expr) -> int:
    """Depth of a leaf is 0."""
    if not e.args:
        return 0
    return 1 + max(depth(a) for a in e.args)


def positions(e: Expr) -> list[tuple[Path, Expr]]:
    """All (path, subexpression) pairs in pre-order; the root comes first."""
    out: list[tuple[Path, Expr]] = []
    stack: list[tuple[Path, Expr]] = [((), e)]
    while stack:
        path, node = stack.pop()
        out.append((path, node))
        for i in range(len(node.args) - 1, -1, -1):
            stack.append((path + (i,), node.args[i]))
    return out


def subexpr_at(e: Expr, path: Path) -> Expr:
    node = e
    for i in path:
        if i >= len(node.args):
            raise PathError(f"path {path} invalid for expression")
        node = node.args[i]
    return node


def replace_at(e: Expr, path: Path, sub: Expr) -> Expr:
    if not path:
        return sub
    i = path[0]
    if i >= len(e.args):
        raise PathError(f"path {path} invalid for expression")
    newargs = list(e.args)
    newargs[i] = replace_at(e.args[i], path[1:], sub)
    return Expr(e.kind, e.name, tuple(newargs))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, int]]:
    toks: list[tuple[str, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()":
            toks.append((c, i))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "()":
            j += 1
        toks.append((text[i:j], i))
        i = j
    return toks


def _is_int_token(tok: str) -> bool:
    body = tok[1:] if tok.startswith("-") else tok
    return body.isdigit() and bool(body)


def _parse_decimal_token(tok: str, pos: int) -> Expr:
    sign = -1 if tok.startswith("-") else 1
    body = tok.lstrip("-")
    ipart, _, fpart = body.partition(".")
    if not ipart.isdigit() or not fpart.isdigit():
        raise ParseError(f"malformed number {tok!r}", pos)
    if len(fpart) > 2:
        raise ParseError(f"constant {tok} has more than two fractional digits", pos)
    scaled = sign * (int(ipart) * 100 + int(fpart) * (10 if len(fpart) == 1 else 1))
    if abs(scaled) > DECIMAL_LIMIT:
        raise ParseError(f"constant {tok} out of range [-3.14, 3.14]", pos)
    return const_dec(scaled)


def _parse_atom(tok: str, pos: int) -> Expr:
    tok = _VAR_ALIASES.get(tok, tok)
    tok = _CONST_ALIASES.get(tok, tok)
    if tok in VARIABLES:
        return var(tok)
    if tok in INT_CONSTANT_NAMES or tok == PI_NAME:
        return const(tok)
    if "." in tok:
        return _parse_decimal_token(tok, pos)
    if _is_int_token(tok):
        raise ParseError(
            f"constant {tok} out of range (named integer constants are "
            f"{', '.join(INT_CONSTANT_NAMES)})", pos)
    raise ParseError(f"unknown symbol {tok!r}", pos)


class _TokenStream:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, int] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> tuple[str, int]:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return t


def _parse_const_form(ts: _TokenStream, open_pos: int) -> Expr:
    tok, pos = ts.next()
    if "/" in tok:
        num_s, _, den_s = tok.partition("/")
        try:
            value = Fraction(int(num_s), int(den_s))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"malformed rational {tok!r}", pos) from None
    elif _is_int_token(tok):
        value = Fraction(int(tok))
    else:
        raise ParseError(f"malformed rational {tok!r}", pos)
    _expect_close(ts, open_pos)
    if value == Fraction(1, 2):
        return HALF
    if value.denominator == 1 and str(value.numerator) in INT_CONSTANT_NAMES:
        return const(str(value.numerator))
    raise ParseError(f"rational constant {value} not in the language", pos)


def _parse_dec_form(ts: _TokenStream, open_pos: int) -> Expr:
    tok, pos = ts.next()
    if not _is_int_token(tok):
        raise ParseError(f"malformed scaled decimal {tok!r}", pos)
    scaled = int(tok)
    if abs(scaled) > DECIMAL_LIMIT:
        raise ParseError(f"decimal constant {scaled / 100} out of range", pos)
    _expect_close(ts, open_pos)
    return const_dec(scaled)


def _expect_close(ts: _TokenStream, open_pos: int) -> None:
    tok, pos = ts.next()
    if tok != ")":
        raise ParseError(f"expected ')' to match '(' at offset {open_pos}", pos)


def _parse_expr(ts: _TokenStream) -> Expr:
    tok, pos = ts.next()
    if tok == ")":
        raise ParseError("unexpected ')'", pos)
    if tok != "(":
        return _parse_atom(tok, pos)
    op, op_pos = ts.next()
    if op == "scsh":
        warnings.warn("operator 'scsh' parsed as 'csch'", stacklevel=4)
        op = "csch"
    if op == "const":
        return _parse_const_form(ts, pos)
    if op == "dec":
        return _parse_dec_form(ts, pos)
    if op in UNARY_OPS:
        a = _parse_expr(ts)
        _expect_close(ts, pos)
        return unary(op, a)
    if op in BINARY_OPS:
        a = _parse_expr(ts)
        b = _parse_expr(ts)
        _expect_close(ts, pos)
        return binary(op, a, b)
    if op == "=":
        raise ParseError("'=' is only allowed at the top of an equation", op_pos)
    raise ParseError(f"unknown operator {op!r}", op_pos)


def parse_expr(text: str) -> Expr:
    """Parse a single prefix-notation expression."""
    ts = _TokenStream(text)
    e = _parse_expr(ts)
    trailing = ts.peek()
    if trailing is not None:
        raise ParseError(f"trailing input {trailing[0]!r}", trailing[1])
    return e


def parse_equation(text: str) -> Equation:
    """Parse ``(= <lhs> <rhs>)``."""
    ts = _TokenStream(text)
    tok, pos = ts.next()
    if tok != "(":
        raise ParseError("equation must start with '(='", pos)
    op, op_pos = ts.next()
    if op != "=":
        raise ParseError(f"expected '=' after '(', got {op!r}", op_pos)
    lhs = _parse_expr(ts)
    rhs = _parse_expr(ts)
    _expect_close(ts, pos)
    trailing = ts.peek()
    if trailing is not None:
        raise ParseError(f"trailing input {trailing[0]!r}", trailing[1])
    return Equation(lhs, rhs)


def render(e: Expr) -> str:
    """Canonical prefix text; ``parse_expr(render(e)) == e``."""
    if e.kind == "var":
        return e.name
    if e.kind == "const":
        if e.name == HALF_NAME:
            return "(const 1/2)"
        if e.name.startswith("dec:"):
            return f"(dec {e.name[4:]})"
        return e.name
    parts = " ".join(render(a) for a in e.args)
    return f"({e.name} {parts})"


def render_equation(eq: Equation) -> str:
    return f"(= {render(eq.lhs)} {render(eq.rhs)})"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class EvalResult:
    outcome: str  # "finite" | "domain_error" | "overflow"
    value: float | None = None
    error_path: Path | None = None

    @property
    def is_finite(self) -> bool:
        return self.outcome == "finite"


class _EvalError(Exception):
    __slots__ = ("domain", "rev_path")

    def __init__(self, domain: bool):
        self.domain = domain
        self.rev_path: list[int] = []


def _cot(v: float) -> float:
    return 1.0 / math.tan(v)


def _sec(v: float) -> float:
    return 1.0 / math.cos(v)


def _csc(v: float) -> float:
    return 1.0 / math.sin(v)


def _acot(v: float) -> float:
    return math.atan(1.0 / v)


def _asec(v: float) -> float:
    return math.acos(1.0 / v)


def _acsc(v: float) -> float:
    return math.asin(1.0 / v)


def _coth(v: float) -> float:
    return 1.0 / math.tanh(v)


def _sech(v: float) -> float:
    return 1.0 / math.cosh(v)


def _csch(v: float) -> float:
    return 1.0 / math.sinh(v)


def _acoth(v: float) -> float:
    return math.atanh(1.0 / v)


def _asech(v: float) -> float:
    return math.acosh(1.0 / v)


def _acsch(v: float) -> float:
    return math.asinh(1.0 / v)


_UNARY_FUNCS = {
    "neg": lambda v: -v,
    "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "cot": _cot, "sec": _sec, "csc": _csc,
    "asin": math.asin, "acos": math.acos, "atan": math.atan,
    "acot": _acot, "asec": _asec, "acsc": _acsc,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "coth": _coth, "sech": _sech, "csch": _csch,
    "asinh": math.asinh, "acosh": math.acosh, "atanh": math.atanh,
    "acoth": _acoth, "asech": _asech, "acsch": _acsch,
    "exp": math.exp, "log": math.log, "sqrt": math.sqrt,
}


def _add(a: float, b: float) -> float:
    return a + b


def _sub(a: float, b: float) -> float:
    return a - b


def _mul(a: float, b: float) -> float:
    return a * b


def _div(a: float, b: float) -> float:
    return a / b


_BINARY_FUNCS = {"+": _add, "-": _sub, "*": _mul, "/": _div, "pow": math.pow}

_CONST_FLOATS: dict[str, float] = {
    "-1": -1.0, "0": 0.0, "1": 1.0, "2": 2.0, "3": 3.0, "4": 4.0, "10": 10.0,
    PI_NAME: math.pi, HALF_NAME: 0.5,
}


def _const_float(name: str) -> float:
    v = _CONST_FLOATS.get(name)
    if v is None:
        v = int(name[4:]) / 100.0
        _CONST_FLOATS[name] = v
    return v


def _eval(e: Expr, env: Mapping[str, float]) -> float:
    kind = e.kind
    if kind == "const":
        return _const_float(e.name)
    if kind == "var":
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if kind == "unary":
        try:
            a = _eval(e.args[0], env)
        except _EvalError as err:
            err.rev_path.append(0)
            raise
        try:
            v = _UNARY_FUNCS[e.name](a)
        except (ValueError, ZeroDivisionError):
            raise _EvalError(domain=True) from None
        except OverflowError:
            raise _EvalError(domain=False) from None
        if not math.isfinite(v):
            raise _EvalError(domain=False)
        return v
    # binary
    try:
        a = _eval(e.args[0], env)
    except _EvalError as err:
        err.rev_path.append(0)
        raise
    try:
        b = _eval(e.args[1], env)
    except _EvalError as err:
        err.rev_path.append(1)
        raise
    try:
        v = _BINARY_FUNCS[e.name](a, b)
    except (ValueError, ZeroDivisionError):
        raise _EvalError(domain=True) from None
    except OverflowError:
        raise _EvalError(domain=False) from None
    if not math.isfinite(v):
        raise _EvalError(domain=False)
    return v


def evaluate(e: Expr, env: Mapping[str, float]) -> EvalResult:
    """Evaluate in float64 under ``env``.

    Returns a finite value, a domain error with the path of the node that left
    its real domain, or an overflow marker when an intermediate is non-finite.
    Raises UnboundVariableError if ``env`` misses a free variable.
    """
    try:
        v = _eval(e, env)
    except _EvalError as err:
        if err.domain:
            return EvalResult("domain_error", error_path=tuple(reversed(err.rev_path)))
        return EvalResult("overflow")
    return EvalResult("finite", value=v)

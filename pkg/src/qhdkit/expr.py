"""Symbolic objective expressions.

Expressions are immutable trees built from constants, variables (bound by
position), the unary functions ``neg``, ``exp``, ``log``, ``sqrt`` and the
binary operators ``add``, ``sub``, ``mul``, ``div``. Powers carry a real
constant exponent. Every constructor folds constant subtrees, so a node never
has only constant children.

The module also splits an expression into the separable form used by the
rest of the package::

    f(x) = c + sum_i g_i(x_i) + sum_j p_j(x_k) * q_j(x_l)

Example::

    >>> e = parse("y^1.5 - exp(4*x)*(y - 0.75)", ["x", "y"])
    >>> round(evaluate(e, [1.0, 1.0]), 4)
    -12.6495
    >>> sep = extract_separable(e, 2)
    >>> len(sep.univariate), len(sep.bivariate)
    (1, 1)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "DomainError",
    "NotSeparable",
    "SeparableObjective",
    "const",
    "var",
    "exp",
    "log",
    "sqrt",
    "parse",
    "evaluate",
    "evaluate_univariate",
    "compile_expr",
    "differentiate",
    "gradient",
    "substitute",
    "extract_separable",
    "polynomial_coefficients",
]

FUNCTIONS = ("exp", "log", "sqrt")


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(ExprError, ValueError):
    """Evaluation left the domain of log, sqrt, division or a fractional power."""


class NotSeparable(ExprError):
    """A term couples three or more variables, or two variables non-multiplicatively."""


@dataclass(frozen=True, eq=True)
class Expr:
    """Expression node.

    ``kind`` is ``"const"``, ``"var"`` or an operator name. ``value`` holds the
    constant, the variable index, or the exponent of a ``"pow"`` node.
    """

    kind: str
    value: float = 0.0
    args: tuple["Expr", ...] = ()

    @cached_property
    def variables(self) -> frozenset[int]:
        if self.kind == "var":
            return frozenset((int(self.value),))
        out: frozenset[int] = frozenset()
        for a in self.args:
            out |= a.variables
        return out

    @property
    def is_const(self) -> bool:
        return self.kind == "const"

    @cached_property
    def _fast(self) -> Callable:
        return _build(self, strict=False)

    @cached_property
    def _strict(self) -> Callable:
        return _build(self, strict=True)

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if isinstance(exponent, Expr):
            if not exponent.is_const:
                raise TypeError("exponent must be a constant")
            exponent = exponent.value
        return power(self, float(exponent))

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"Expr({to_string(self)!r})"


def _lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return const(float(v))


ZERO = Expr("const", 0.0)
ONE = Expr("const", 1.0)


def const(v: float) -> Expr:
    v = float(v)
    if v == 0.0:
        return ZERO
    return Expr("const", v)


def var(i: int) -> Expr:
    if i < 0:
        raise ValueError("variable index must be nonnegative")
    return Expr("var", float(i))


# -- smart constructors ------------------------------------------------------


def _is(e: Expr, v: float) -> bool:
    return e.kind == "const" and e.value == v


def add(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Expr("add", 0.0, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return Expr("sub", 0.0, (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    return Expr("mul", 0.0, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if b.is_const:
        if b.value == 0.0:
            raise DomainError("division by zero")
        if a.is_const:
            return const(a.value / b.value)
        if b.value == 1.0:
            return a
    if _is(a, 0.0):
        return ZERO
    return Expr("div", 0.0, (a, b))


def neg(a: Expr) -> Expr:
    if a.is_const:
        return const(-a.value)
    if a.kind == "neg":
        return a.args[0]
    return Expr("neg", 0.0, (a,))


def power(a: Expr, c: float) -> Expr:
    c = float(c)
    if not math.isfinite(c):
        raise DomainError("exponent must be finite")
    if c == 0.0:
        return ONE
    if c == 1.0:
        return a
    if a.is_const:
        return const(_const_pow(a.value, c))
    return Expr("pow", c, (a,))


def _const_pow(base: float, c: float) -> float:
    if base < 0 and not float(c).is_integer():
        raise DomainError(f"fractional power {c} of negative number {base}")
    if base == 0 and c < 0:
        raise DomainError("negative power of zero")
    try:
        return math.pow(base, c)
    except OverflowError:
        return math.copysign(math.inf, base) if float(c).is_integer() and int(c) % 2 else math.inf


def exp(a: Expr) -> Expr:
    a = _lift(a)
    if a.is_const:
        try:
            return const(math.exp(a.value))
        except OverflowError:
            return const(math.inf)
    return Expr("exp", 0.0, (a,))


def log(a: Expr) -> Expr:
    a = _lift(a)
    if a.is_const:
        if not a.value > 0:
            raise DomainError(f"log of nonpositive number {a.value}")
        return const(math.log(a.value))
    return Expr("log", 0.0, (a,))


def sqrt(a: Expr) -> Expr:
    a = _lift(a)
    if a.is_const:
        if a.value < 0:
            raise DomainError(f"sqrt of negative number {a.value}")
        return const(math.sqrt(a.value))
    return Expr("sqrt", 0.0, (a,))


_UNARY = {"neg": neg, "exp": exp, "log": log, "sqrt": sqrt}
_BINARY = {"add": add, "sub": sub, "mul": mul, "div": div}


def rebuild(e: Expr, args: Sequence[Expr]) -> Expr:
    """Rebuild ``e`` with new children through the folding constructors."""
    if e.kind in _UNARY:
        return _UNARY[e.kind](args[0])
    if e.kind in _BINARY:
        return _BINARY[e.kind](args[0], args[1])
    if e.kind == "pow":
        return power(args[0], e.value)
    return e


# -- printing ----------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_string(e: Expr, names: Sequence[str] | None = None) -> str:
    def name(i: int) -> str:
        return names[i] if names is not None else f"x{i}"

    def fmt(e: Expr) -> tuple[str, int]:
        k = e.kind
        if k == "const":
            s = repr(e.value)
            return (s, 5) if e.value >= 0 else (s, 3)
        if k == "var":
            return name(int(e.value)), 5
        if k in FUNCTIONS:
            return f"{k}({fmt(e.args[0])[0]})", 5
        if k == "neg":
            s, p = fmt(e.args[0])
            return "-" + (s if p > 3 else f"({s})"), 3
        if k == "pow":
            s, p = fmt(e.args[0])
            c = e.value
            cs = repr(c) if c >= 0 else f"({c!r})"
            return (s if p > 4 else f"({s})") + "^" + cs, 4
        prec = _PREC[k]
        ls, lp = fmt(e.args[0])
        rs, rp = fmt(e.args[1])
        sym = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[k]
        if lp < prec:
            ls = f"({ls})"
        if rp < prec or (rp == prec and k in ("sub", "div")):
            rs = f"({rs})"
        return ls + sym + rs, prec

    return fmt(e)[0]


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, var_names: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vars = {name: k for k, name in enumerate(var_names)}

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                e = mul(e, rhs)
            else:
                try:
                    e = div(e, rhs)
                except DomainError as exc:
                    raise ParseError(str(exc), pos) from None
        return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            inner = self.unary()
            return neg(inner) if val == "-" else inner
        return self.power()

    def power(self) -> Expr:
        base = self.base()
        kind, val, pos = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            exponent = self.unary()
            if not exponent.is_const:
                raise ParseError("exponent must be a constant", pos)
            try:
                return power(base, exponent.value)
            except DomainError as exc:
                raise ParseError(str(exc), pos) from None
        return base

    def base(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return const(float(val))
        if kind == "id":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise ParseError(f"unsupported function {val!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                try:
                    return {"exp": exp, "log": log, "sqrt": sqrt}[val](arg)
                except DomainError as exc:
                    raise ParseError(str(exc), pos) from None
            if val not in self.vars:
                raise ParseError(f"unknown identifier {val!r}", pos)
            return var(self.vars[val])
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str, var_names: Sequence[str]) -> Expr:
    """Parse ``text`` into an expression; identifiers bind to positions in ``var_names``.

    Grammar::

        expr   := term (('+' | '-') term)*
        term   := unary (('*' | '/') unary)*
        unary  := ('-' | '+') unary | power
        power  := base (('^' | '**') unary)?      # exponent must fold to a constant
        base   := number | ident | func '(' expr ')' | '(' expr ')'

    Unary minus binds looser than ``^``, so ``-x^2`` reads as ``-(x^2)``.
    """
    try:
        return _Parser(text, var_names).parse()
    except RecursionError:
        raise ParseError("expression nested too deeply", 0) from None


# -- evaluation --------------------------------------------------------------


def _build(e: Expr, strict: bool) -> Callable:
    k = e.kind
    if k == "const":
        v = e.value
        return lambda x: v
    if k == "var":
        i = int(e.value)
        return lambda x: x[i]
    fs = [_build(a, strict) for a in e.args]
    if k == "add":
        a, b = fs
        return lambda x: a(x) + b(x)
    if k == "sub":
        a, b = fs
        return lambda x: a(x) - b(x)
    if k == "mul":
        a, b = fs
        return lambda x: a(x) * b(x)
    if k == "neg":
        (a,) = fs
        return lambda x: -a(x)
    if k == "exp":
        (a,) = fs
        return lambda x: np.exp(a(x))
    if not strict:
        if k == "div":
            a, b = fs
            return lambda x: np.divide(a(x), b(x))
        if k == "log":
            (a,) = fs
            return lambda x: np.log(a(x))
        if k == "sqrt":
            (a,) = fs
            return lambda x: np.sqrt(a(x))
        if k == "pow":
            (a,) = fs
            c = e.value
            if c == 2.0:
                return lambda x: np.square(a(x))
            return lambda x: np.power(a(x), c)
        raise ValueError(f"unknown node kind {k!r}")

    if k == "div":
        a, b = fs

        def f(x):
            den = b(x)
            if np.any(np.asarray(den) == 0):
                raise DomainError("division by zero")
            return a(x) / den

        return f
    if k == "log":
        (a,) = fs

        def f(x):
            v = a(x)
            if np.any(np.asarray(v) <= 0):
                raise DomainError("log of nonpositive argument")
            return np.log(v)

        return f
    if k == "sqrt":
        (a,) = fs

        def f(x):
            v = a(x)
            if np.any(np.asarray(v) < 0):
                raise DomainError("sqrt of negative argument")
            return np.sqrt(v)

        return f
    if k == "pow":
        (a,) = fs
        c = e.value
        integral = c.is_integer()

        def f(x):
            v = np.asarray(a(x), dtype=float)
            if not integral and np.any(v < 0):
                raise DomainError(f"fractional power {c} of negative argument")
            if c < 0 and np.any(v == 0):
                raise DomainError("negative power of zero")
            return np.power(v, c)

        return f
    raise ValueError(f"unknown node kind {k!r}")


def evaluate(e: Expr, x) -> float | np.ndarray:
    """Evaluate ``e`` at ``x``; entries of ``x`` may be floats or broadcastable arrays.

    Raises :class:`DomainError` instead of returning NaN.
    """
    need = max(e.variables) + 1 if e.variables else 0
    if len(x) < need:
        raise ValueError(f"expression uses {need} variables, got {len(x)} values")
    with np.errstate(over="ignore"):
        out = e._strict(x)
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def evaluate_univariate(e: Expr, values) -> np.ndarray:
    """Evaluate an expression in at most one variable at each entry of ``values``."""
    values = np.asarray(values, dtype=float)
    if len(e.variables) > 1:
        raise ValueError("expression is not univariate")
    if not e.variables:
        return np.full(values.shape, evaluate(e, []))
    (i,) = e.variables
    x = [0.0] * i + [values]
    return np.broadcast_to(evaluate(e, x), values.shape).astype(float)


def compile_expr(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Fast evaluator over stacked points ``x`` of shape ``(n, ...)``.

    Out-of-domain points produce non-finite values instead of raising.
    """
    f = e._fast

    def run(x):
        with np.errstate(all="ignore"):
            out = f(x)
        return np.array(np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)[1:]))

    return run


# -- calculus and rewriting --------------------------------------------------


def differentiate(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to variable ``i``."""
    if i not in e.variables:
        return ZERO
    k = e.kind
    if k == "var":
        return ONE
    if k == "add":
        return add(differentiate(e.args[0], i), differentiate(e.args[1], i))
    if k == "sub":
        return sub(differentiate(e.args[0], i), differentiate(e.args[1], i))
    if k == "neg":
        return neg(differentiate(e.args[0], i))
    if k == "mul":
        a, b = e.args
        return add(mul(differentiate(a, i), b), mul(a, differentiate(b, i)))
    if k == "div":
        a, b = e.args
        da, db = differentiate(a, i), differentiate(b, i)
        return sub(div(da, b), div(mul(a, db), power(b, 2.0)))
    if k == "pow":
        (a,) = e.args
        c = e.value
        return mul(mul(const(c), power(a, c - 1.0)), differentiate(a, i))
    if k == "exp":
        (a,) = e.args
        return mul(e, differentiate(a, i))
    if k == "log":
        (a,) = e.args
        return div(differentiate(a, i), a)
    if k == "sqrt":
        (a,) = e.args
        return div(differentiate(a, i), mul(const(2.0), e))
    raise ValueError(f"unknown node kind {k!r}")


def gradient(e: Expr, n: int) -> list[Expr]:
    return [differentiate(e, i) for i in range(n)]


def substitute(e: Expr, mapping: dict[int, Expr]) -> Expr:
    """Replace variables by expressions, refolding constants on the way up."""
    if e.kind == "var":
        return mapping.get(int(e.value), e)
    if not e.args or not (e.variables & mapping.keys()):
        return e
    return rebuild(e, [substitute(a, mapping) for a in e.args])


def polynomial_coefficients(e: Expr) -> list[float] | None:
    """Coefficients ``[c0, c1, ...]`` if ``e`` is a polynomial in one variable, else None."""
    if len(e.variables) > 1:
        return None
    k = e.kind
    if k == "const":
        return [e.value]
    if k == "var":
        return [0.0, 1.0]
    if k in ("add", "sub", "mul"):
        a = polynomial_coefficients(e.args[0])
        b = polynomial_coefficients(e.args[1])
        if a is None or b is None:
            return None
        if k == "mul":
            out = [0.0] * (len(a) + len(b) - 1)
            for p, ca in enumerate(a):
                for q, cb in enumerate(b):
                    out[p + q] += ca * cb
            return out
        sign = 1.0 if k == "add" else -1.0
        out = [0.0] * max(len(a), len(b))
        for p, ca in enumerate(a):
            out[p] += ca
        for q, cb in enumerate(b):
            out[q] += sign * cb
        return out
    if k == "neg":
        a = polynomial_coefficients(e.args[0])
        return None if a is None else [-c for c in a]
    if k == "div" and e.args[1].is_const:
        a = polynomial_coefficients(e.args[0])
        return None if a is None else [c / e.args[1].value for c in a]
    if k == "pow" and e.value.is_integer() and 0 < e.value <= 16:
        a = polynomial_coefficients(e.args[0])
        if a is None:
            return None
        out = [1.0]
        for _ in range(int(e.value)):
            nxt = [0.0] * (len(out) + len(a) - 1)
            for p, co in enumerate(out):
                for q, ca in enumerate(a):
                    nxt[p + q] += co * ca
            out = nxt
        return out
    return None


# -- separable decomposition -------------------------------------------------


@dataclass(frozen=True)
class SeparableObjective:
    """``constant + sum(g_i(x_i)) + sum(p_j(x_k) * q_j(x_l))`` over ``n`` variables.

    ``univariate`` holds ``(i, g_i)`` pairs, at most one per variable, sorted by
    index. ``bivariate`` holds ``(k, l, p, q)`` with ``k < l``; ``p`` depends only
    on ``x_k`` (or is constant) and ``q`` only on ``x_l``.
    """

    n: int
    univariate: tuple[tuple[int, Expr], ...] = ()
    bivariate: tuple[tuple[int, int, Expr, Expr], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        seen = set()
        for i, g in self.univariate:
            if i in seen:
                raise ValueError(f"duplicate univariate entry for variable {i}")
            seen.add(i)
            if not g.variables <= {i}:
                raise ValueError(f"univariate entry {i} references {sorted(g.variables)}")
        for k, l, p, q in self.bivariate:
            if not k < l:
                raise ValueError("bivariate entries need k < l")
            if not (p.variables <= {k} and q.variables <= {l}):
                raise ValueError(f"bivariate factors do not match variables ({k}, {l})")
        for i in seen | {v for k, l, _, _ in self.bivariate for v in (k, l)}:
            if not 0 <= i < self.n:
                raise ValueError(f"variable index {i} outside 0..{self.n - 1}")

    @property
    def m(self) -> int:
        return len(self.bivariate)

    def reassemble(self) -> Expr:
        e = const(self.constant)
        for _, g in self.univariate:
            e = add(e, g)
        for _, _, p, q in self.bivariate:
            e = add(e, mul(p, q))
        return e

    def substitute(self, mapping: dict[int, Expr]) -> "SeparableObjective":
        """Apply a per-variable substitution that keeps each variable in its own slot."""
        uni = []
        constant = self.constant
        for i, g in self.univariate:
            g2 = substitute(g, mapping)
            if g2.is_const:
                constant += g2.value
            else:
                uni.append((i, g2))
        bi = []
        for k, l, p, q in self.bivariate:
            p2, q2 = substitute(p, mapping), substitute(q, mapping)
            if p2.is_const and q2.is_const:
                constant += p2.value * q2.value
            elif _is(p2, 0.0) or _is(q2, 0.0):
                continue
            else:
                bi.append((k, l, p2, q2))
        return SeparableObjective(self.n, tuple(uni), tuple(bi), constant)


def _factors(e: Expr) -> list[Expr]:
    """Flatten a product into factors; divisors become reciprocals."""
    k = e.kind
    if k == "mul":
        return _factors(e.args[0]) + _factors(e.args[1])
    if k == "neg":
        return [const(-1.0)] + _factors(e.args[0])
    if k == "div":
        num, den = e.args
        if len(den.variables) <= 1:
            return _factors(num) + [div(ONE, den)]
        return _factors(num) + [div(ONE, f) for f in _factors(den)]
    if k == "pow" and e.value.is_integer() and e.args[0].kind in ("mul", "neg", "div"):
        return [power(f, e.value) for f in _factors(e.args[0])]
    return [e]


def _split_product(e: Expr) -> tuple[int, int, Expr, Expr] | None:
    vs = sorted(e.variables)
    if len(vs) != 2:
        return None
    k, l = vs
    p, q = ONE, ONE
    for f in _factors(e):
        fv = f.variables
        if not fv:
            p = mul(f, p)
        elif fv == {k}:
            p = mul(p, f)
        elif fv == {l}:
            q = mul(q, f)
        else:
            return None
    return k, l, p, q


def _terms(e: Expr) -> list[Expr]:
    """Expand ``e`` into summands, distributing only where two variables are entangled."""
    k = e.kind
    if k == "add":
        return _terms(e.args[0]) + _terms(e.args[1])
    if k == "sub":
        return _terms(e.args[0]) + [neg(t) for t in _terms(e.args[1])]
    if k == "neg":
        return [neg(t) for t in _terms(e.args[0])]
    if len(e.variables) <= 1 or _split_product(e) is not None:
        return [e]
    if k == "mul":
        left, right = _terms(e.args[0]), _terms(e.args[1])
        if len(left) == 1 and len(right) == 1:
            return [e]
        return [t for a in left for b in right for t in _terms(mul(a, b))]
    if k == "div":
        num = _terms(e.args[0])
        if len(num) == 1:
            return [e]
        return [t for a in num for t in _terms(div(a, e.args[1]))]
    if k == "pow" and e.value.is_integer() and 2 <= e.value <= 8:
        base = e.args[0]
        if len(_terms(base)) == 1:
            return [e]
        return _terms(mul(base, power(base, e.value - 1.0)))
    return [e]


def extract_separable(e: Expr, n: int) -> SeparableObjective:
    """Decompose ``e`` into constant, univariate and bivariate-product parts.

    Raises :class:`NotSeparable` for terms that couple three or more variables
    or two variables in a way that does not factor as ``p(x_k) * q(x_l)``.
    """
    if e.variables and max(e.variables) >= n:
        raise ValueError(f"expression references variable {max(e.variables)} but n = {n}")
    constant = 0.0
    uni: dict[int, Expr] = {}
    bi: list[tuple[int, int, Expr, Expr]] = []
    for t in _terms(e):
        vs = t.variables
        if not vs:
            constant += evaluate(t, [])
        elif len(vs) == 1:
            (i,) = vs
            uni[i] = add(uni[i], t) if i in uni else t
        elif len(vs) == 2:
            split = _split_product(t)
            if split is None:
                raise NotSeparable(f"term {to_string(t)} does not factor as p(x_k)*q(x_l)")
            bi.append(split)
        else:
            raise NotSeparable(
                f"term {to_string(t)} couples {len(vs)} variables {sorted(vs)}"
            )
    univariate = []
    for i in sorted(uni):
        g = uni[i]
        if g.is_const:
            constant += g.value
        else:
            univariate.append((i, g))
    return SeparableObjective(n, tuple(univariate), tuple(bi), constant)

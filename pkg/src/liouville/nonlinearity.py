"""Nonlinear right-hand sides f defined on the half line [0, inf).

Five concrete families are provided:

* :class:`Power` -- pure power ``z**exponent``.
* :class:`PowerLog` -- ``z**power * log(e + 1/z)**mu``, extended by 0
  at z = 0 (the limit value whenever ``power > 0``).
* :class:`Expression` -- an arbitrary closed-form expression in one
  variable ``z``, built from the small grammar below.
* :class:`Shifted` -- ``f(z + alpha)`` for a base f and ``alpha >= 0``.
* :class:`Floored` -- ``max(f(z), z**exponent)``.

Expression grammar (whitespace is insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | 'z' | 'e' | 'log' '(' expr ')'
             | 'exp' '(' expr ')' | '(' expr ')'

``e`` denotes Euler's number.  Numbers accept scientific notation
(``2.5e-3``).  ``^`` binds tighter than unary minus on the left, so
``-z^2`` is ``-(z^2)`` while ``z^-2`` is a valid power.

Two evaluators are provided.  The plain one computes f(z) directly in
doubles.  The signed-log one propagates (sign, log-magnitude) pairs
through the tree, which keeps deep power/log compositions meaningful
far below the double underflow threshold; the integral classifier
relies on it when probing shells at z around 1e-100 and smaller.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import DomainError, EvalOverflow, ParseError

__all__ = [
    "ExprNode",
    "Num",
    "Var",
    "Euler",
    "Neg",
    "Bin",
    "Call",
    "parse_expression",
    "to_source",
    "signed_log_eval",
    "Nonlinearity",
    "Power",
    "PowerLog",
    "Expression",
    "Shifted",
    "Floored",
    "parse_nonlinearity",
    "shift",
    "floor_by_power",
    "MonotonicityReport",
    "check_monotone",
]

_LOG_MAX = math.log(sys.float_info.max)
_NEG_INF = -math.inf


# ---------------------------------------------------------------------------
# abstract syntax tree


class ExprNode:
    """Base class for expression tree nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Num(ExprNode):
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"numeric literal must be finite, got {self.value!r}")


@dataclass(frozen=True, slots=True)
class Var(ExprNode):
    pass


@dataclass(frozen=True, slots=True)
class Euler(ExprNode):
    pass


@dataclass(frozen=True, slots=True)
class Neg(ExprNode):
    arg: ExprNode


@dataclass(frozen=True, slots=True)
class Bin(ExprNode):
    op: str
    left: ExprNode
    right: ExprNode

    def __post_init__(self) -> None:
        if self.op not in ("+", "-", "*", "/", "^"):
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True, slots=True)
class Call(ExprNode):
    fn: str
    arg: ExprNode

    def __post_init__(self) -> None:
        if self.fn not in ("log", "exp"):
            raise ValueError(f"unknown function {self.fn!r}")


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"""(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^()])""",
    re.VERBOSE,
)

_Token = Tuple[str, str, int]  # kind, text, offset


def _tokenize(text: str) -> List[_Token]:
    out: List[_Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        out.append((m.lastgroup, m.group(), pos))  # type: ignore[arg-type]
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def take(self) -> _Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, op: str) -> None:
        kind, text, pos = self.take()
        if kind != "op" or text != op:
            what = repr(text) if text else "end of input"
            raise ParseError(f"expected {op!r}, got {what}", pos)

    def parse(self) -> ExprNode:
        node = self.sum_()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {text!r}", pos)
        return node

    def sum_(self) -> ExprNode:
        node = self.product()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in ("+", "-"):
                self.take()
                node = Bin(text, node, self.product())
            else:
                return node

    def product(self) -> ExprNode:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in ("*", "/"):
                self.take()
                node = Bin(text, node, self.unary())
            else:
                return node

    def unary(self) -> ExprNode:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> ExprNode:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> ExprNode:
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text == "z":
                return Var()
            if text == "e":
                return Euler()
            if text in ("log", "exp"):
                self.expect("(")
                arg = self.sum_()
                self.expect(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.sum_()
            self.expect(")")
            return node
        what = repr(text) if text else "end of input"
        raise ParseError(f"expected a value, got {what}", pos)


def parse_expression(text: str) -> ExprNode:
    """Parse expression text into a tree, or raise :class:`ParseError`
    carrying the character offset of the problem."""
    return _Parser(_tokenize(text)).parse()


# ---------------------------------------------------------------------------
# printer

_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _prec(node: ExprNode) -> float:
    if isinstance(node, Bin):
        return _BIN_PREC[node.op]
    if isinstance(node, Neg):
        return 2.5
    if isinstance(node, Num) and node.value < 0:
        # a negative literal prints with a leading '-', same as Neg
        return 2.5
    return 4.0


def to_source(node: ExprNode) -> str:
    """Render a tree back to grammar text.

    For trees produced by :func:`parse_expression` (which never contain
    negative literals) the result reparses to an identical tree.
    """
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "z"
    if isinstance(node, Euler):
        return "e"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        if _prec(node.arg) <= 2:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, Bin):
        op = node.op
        ls = to_source(node.left)
        rs = to_source(node.right)
        if op in ("+", "-"):
            if _prec(node.right) == 1:
                rs = f"({rs})"
        elif op in ("*", "/"):
            if _prec(node.left) < 2:
                ls = f"({ls})"
            if _prec(node.right) <= 2:
                rs = f"({rs})"
        else:  # '^', right associative
            if _prec(node.left) <= 3:
                ls = f"({ls})"
            if _prec(node.right) < 2.5:
                rs = f"({rs})"
        return f"{ls}{op}{rs}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# plain evaluation


def _eval_plain(node: ExprNode, z: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return z
    if isinstance(node, Euler):
        return math.e
    if isinstance(node, Neg):
        return -_eval_plain(node.arg, z)
    if isinstance(node, Call):
        a = _eval_plain(node.arg, z)
        if node.fn == "log":
            if a <= 0.0:
                raise DomainError(f"log of non-positive value {a!r}")
            return math.log(a)
        try:
            return math.exp(a)
        except OverflowError:
            raise EvalOverflow(f"exp({a!r}) exceeds double range") from None
    if isinstance(node, Bin):
        a = _eval_plain(node.left, z)
        b = _eval_plain(node.right, z)
        op = node.op
        if op == "^":
            try:
                v = math.pow(a, b)
            except ValueError:
                raise DomainError(f"cannot raise {a!r} to the power {b!r}") from None
            except OverflowError:
                raise EvalOverflow(f"{a!r}^{b!r} exceeds double range") from None
        elif op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            v = a / b
        elif op == "+":
            v = a + b
        elif op == "-":
            v = a - b
        else:
            v = a * b
        if not math.isfinite(v):
            raise EvalOverflow(f"intermediate value {v!r} in {op!r}")
        return v
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# signed-log evaluation

_Signed = Tuple[int, float]  # sign in {-1, 0, 1}; value = sign * exp(mag)


def _signed_of(x: float) -> _Signed:
    if x == 0.0:
        return (0, _NEG_INF)
    return ((1 if x > 0 else -1), math.log(abs(x)))


def _signed_to_float(s: int, m: float) -> float:
    if s == 0:
        return 0.0
    if m > _LOG_MAX:
        raise EvalOverflow(f"value of magnitude exp({m:.6g}) exceeds double range")
    return s * math.exp(m)


def _signed_add(s1: int, m1: float, s2: int, m2: float) -> _Signed:
    if s1 == 0:
        return (s2, m2)
    if s2 == 0:
        return (s1, m1)
    if m1 == m2 and s1 != s2:
        return (0, _NEG_INF)
    if m1 >= m2:
        bs, bm, sm = s1, m1, m2
    else:
        bs, bm, sm = s2, m2, m1
    d = sm - bm  # <= 0
    if s1 == s2:
        return (s1, bm + math.log1p(math.exp(d)))
    return (bs, bm + math.log(-math.expm1(d)))


def signed_log_eval(node: ExprNode, ln_z: float) -> _Signed:
    """Evaluate at z = exp(ln_z), returning (sign, log of magnitude).

    ``ln_z`` must be finite, so z is strictly positive.  The pair
    ``(0, -inf)`` denotes an exact zero.  Magnitudes are unrestricted;
    only converting back to a double can overflow.
    """
    if isinstance(node, Num):
        return _signed_of(node.value)
    if isinstance(node, Var):
        return (1, ln_z)
    if isinstance(node, Euler):
        return (1, 1.0)
    if isinstance(node, Neg):
        s, m = signed_log_eval(node.arg, ln_z)
        return (-s, m)
    if isinstance(node, Call):
        s, m = signed_log_eval(node.arg, ln_z)
        if node.fn == "log":
            if s <= 0:
                raise DomainError("log of a non-positive value")
            # the argument's log-magnitude is the value of log itself
            return _signed_of(m)
        # exp: the new log-magnitude is the argument's value
        if s == 0:
            return (1, 0.0)
        try:
            x = s * math.exp(m)
        except OverflowError:
            if s > 0:
                raise EvalOverflow("exp argument too large") from None
            return (1, _NEG_INF)
        return (1, x)
    if isinstance(node, Bin):
        op = node.op
        if op == "^":
            s, m = signed_log_eval(node.left, ln_z)
            es, em = signed_log_eval(node.right, ln_z)
            e = _signed_to_float(es, em)
            if s == 0:
                if e > 0:
                    return (0, _NEG_INF)
                if e == 0:
                    return (1, 0.0)
                raise DomainError("zero raised to a negative power")
            if s < 0:
                if e != math.floor(e):
                    raise DomainError("negative base with fractional power")
                sign = 1 if int(e) % 2 == 0 else -1
            else:
                sign = 1
            mag = m * e
            if math.isnan(mag):  # 0 * inf: base magnitude 1 or exponent 0
                mag = 0.0
            return (sign, mag)
        s1, m1 = signed_log_eval(node.left, ln_z)
        s2, m2 = signed_log_eval(node.right, ln_z)
        if op == "+":
            return _signed_add(s1, m1, s2, m2)
        if op == "-":
            return _signed_add(s1, m1, -s2, m2)
        if op == "*":
            if s1 == 0 or s2 == 0:
                return (0, _NEG_INF)
            return (s1 * s2, m1 + m2)
        # division
        if s2 == 0:
            raise DomainError("division by zero")
        if s1 == 0:
            return (0, _NEG_INF)
        return (s1 * s2, m1 - m2)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# nonlinearity families


class Nonlinearity:
    """A function on [0, inf) with checked evaluation.

    Calling an instance validates the argument, evaluates the family
    rule, and rejects non-finite or negative results with a package
    error instead of letting NaN or inf leak into quadrature.
    """

    __slots__ = ()

    def _value(self, z: float) -> float:
        raise NotImplementedError

    def __call__(self, z: float) -> float:
        if isinstance(z, bool) or not isinstance(z, (int, float)):
            raise TypeError(f"argument must be a real number, got {type(z).__name__}")
        z = float(z)
        if math.isnan(z) or z < 0.0:
            raise DomainError(f"argument must be >= 0, got {z!r}")
        v = self._value(z)
        if math.isnan(v) or math.isinf(v):
            raise EvalOverflow(f"value at z={z!r} is {v!r}")
        if v < 0.0:
            raise DomainError(f"negative value {v!r} at z={z!r}; right-hand sides must be >= 0")
        return v


@dataclass(frozen=True)
class Power(Nonlinearity):
    """f(z) = z**exponent."""

    exponent: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.exponent):
            raise ValueError(f"exponent must be finite, got {self.exponent!r}")

    def _value(self, z: float) -> float:
        try:
            return math.pow(z, self.exponent)
        except ValueError:
            raise DomainError(f"0 cannot be raised to the power {self.exponent!r}") from None
        except OverflowError:
            raise EvalOverflow(f"{z!r}^{self.exponent!r} exceeds double range") from None


@dataclass(frozen=True)
class PowerLog(Nonlinearity):
    """f(z) = z**power * log(e + 1/z)**mu for z > 0, and f(0) = 0.

    The logarithmic factor is computed as log1p(e*z) - log(z), which
    is exact where the naive form e + 1/z would overflow or lose all
    precision.  The factor is always >= 1, so any real ``mu`` is safe.
    """

    mu: float
    power: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if not math.isfinite(self.power):
            raise ValueError(f"power must be finite, got {self.power!r}")

    def _value(self, z: float) -> float:
        if z == 0.0:
            return 0.0
        log_factor = math.log1p(math.e * z) - math.log(z)
        try:
            return math.pow(z, self.power) * math.pow(log_factor, self.mu)
        except OverflowError:
            raise EvalOverflow(f"value at z={z!r} exceeds double range") from None


@dataclass(frozen=True)
class Expression(Nonlinearity):
    """f given by a closed-form expression tree in the variable z."""

    root: ExprNode

    @property
    def source(self) -> str:
        return to_source(self.root)

    def __repr__(self) -> str:  # the tree form is unreadable in test output
        return f"Expression({self.source!r})"

    def _value(self, z: float) -> float:
        return _eval_plain(self.root, z)


@dataclass(frozen=True)
class Shifted(Nonlinearity):
    """f(z) = base(z + alpha), alpha >= 0."""

    base: Nonlinearity
    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha!r}")

    def _value(self, z: float) -> float:
        return self.base(z + self.alpha)


@dataclass(frozen=True)
class Floored(Nonlinearity):
    """f(z) = max(base(z), z**exponent)."""

    base: Nonlinearity
    exponent: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.exponent):
            raise ValueError(f"exponent must be finite, got {self.exponent!r}")

    def _value(self, z: float) -> float:
        try:
            floor = math.pow(z, self.exponent)
        except ValueError:
            raise DomainError(f"0 cannot be raised to the power {self.exponent!r}") from None
        except OverflowError:
            raise EvalOverflow(f"{z!r}^{self.exponent!r} exceeds double range") from None
        return max(self.base(z), floor)


def parse_nonlinearity(text: str) -> Expression:
    """Parse grammar text into an :class:`Expression` nonlinearity."""
    return Expression(parse_expression(text))


def shift(f: Nonlinearity, alpha: float) -> Shifted:
    """Shift the argument: the result evaluates base at z + alpha.

    ``shift(f, 0.0)`` evaluates identically to ``f``.
    """
    return Shifted(f, float(alpha))


def floor_by_power(f: Nonlinearity, params) -> Floored:
    """Floor f by the power z**(1 + q), where q is the critical
    exponent of ``params``.  The floored function is strictly positive
    on (0, inf) even when f vanishes."""
    from .criterion import critical_exponent

    return Floored(f, 1.0 + critical_exponent(params))


# ---------------------------------------------------------------------------
# monotonicity probe


@dataclass(frozen=True, slots=True)
class MonotonicityReport:
    """Outcome of a sampled non-decrease check.

    When ``monotone`` is False the four remaining fields identify the
    first offending pair of sample points.
    """

    monotone: bool
    zeta_lo: Optional[float] = None
    zeta_hi: Optional[float] = None
    value_lo: Optional[float] = None
    value_hi: Optional[float] = None


def check_monotone(
    f: Nonlinearity,
    eps: float,
    samples: int = 256,
    rel_slack: float = 1e-12,
) -> MonotonicityReport:
    """Probe f for non-decrease on a log grid spanning (0, eps].

    The grid covers twelve decades below eps.  A decrease smaller than
    ``rel_slack`` relative to the local magnitude is tolerated so that
    constant functions pass despite rounding.  Evaluation errors
    propagate to the caller untouched.
    """
    if not (math.isfinite(eps) and eps > 0):
        raise ValueError(f"eps must be positive and finite, got {eps!r}")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples!r}")
    prev_z = eps * 1e-12
    prev_v = f(prev_z)
    for i in range(1, samples):
        z = eps * 10.0 ** (-12.0 * (1.0 - i / (samples - 1)))
        v = f(z)
        slack = rel_slack * max(abs(prev_v), abs(v), 1.0)
        if v < prev_v - slack:
            return MonotonicityReport(False, prev_z, z, prev_v, v)
        prev_z, prev_v = z, v
    return MonotonicityReport(True)

"""
Integrand expressions: parser, printer, vectorized evaluator and a decay
classifier that tells the quadrature engine which strategy fits.

Grammar (docs/grammar.md has the full EBNF):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?          right-associative
    primary := NUMBER | "x" | "pi" | NAME | FUNC "(" args ")" | "(" expr ")"

There is no implicit multiplication: "2x" is rejected by the lexer.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

import numpy as np

from . import specfun

ParamMap = Mapping[str, float]
Value = Union[float, np.ndarray]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected: Tuple[str, ...] = ()):
        self.message = message
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class UnboundParameterError(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self) -> str:
        return f"parameter '{self.name}' is not bound"


class ExprDomainError(ValueError):
    pass


####################################################################################
# AST
####################################################################################

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]


Expr = Union[Num, Var, Param, BinOp, Neg, Call]

X = Var()
CONSTANTS = {"pi": math.pi}


def _sqrt(v):
    if np.any(np.asarray(v) < 0):
        raise ExprDomainError("sqrt of a negative number")
    return np.sqrt(v)


def _ln(v):
    if np.any(np.asarray(v) <= 0):
        raise ExprDomainError("ln of a non-positive number")
    return np.log(v)


FUNCTIONS: Dict[str, Tuple[int, Callable]] = {
    "exp": (1, np.exp),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "sqrt": (1, _sqrt),
    "abs": (1, np.abs),
    "ln": (1, _ln),
    "erfc": (1, specfun.erfc),
    "erfcx": (1, specfun.erfcx),
    "besselj": (2, specfun.besselj),
    "gamma": (1, specfun.gamma),
    "e1": (1, specfun.exp_e1),
}


####################################################################################
# Lexer / parser
####################################################################################

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_SYMBOLS = "+-*/^(),"


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM, NAME, a symbol character, or END
    text: str
    pos: int


def _tokenize(src: str) -> List[_Token]:
    tokens: List[_Token] = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < len(src) and src[i + 1].isdigit()):
            m = _NUMBER.match(src, i)
            end = m.end()
            if end < len(src) and (src[end].isalpha() or src[end] == "_"):
                raise ParseError(f"unexpected character '{src[end]}' after number (no implicit multiplication)",
                                 end, ("operator",))
            tokens.append(_Token("NUM", m.group(0), i))
            i = end
            continue
        if ch.isalpha() or ch == "_":
            m = _NAME.match(src, i)
            tokens.append(_Token("NAME", m.group(0), i))
            i = m.end()
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character '{ch}'", i)
    tokens.append(_Token("END", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        if self.current.kind != kind:
            raise ParseError(f"unexpected {self._describe(self.current)}", self.current.pos, (f"'{kind}'",))
        return self.advance()

    @staticmethod
    def _describe(tok: _Token) -> str:
        return "end of input" if tok.kind == "END" else f"'{tok.text}'"

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "END":
            raise ParseError(f"unexpected {self._describe(self.current)}", self.current.pos,
                             ("operator", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.current.kind == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.current.kind == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.current
        if tok.kind == "NUM":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "NAME":
            self.advance()
            if self.current.kind == "(":
                return self.call(tok)
            if tok.text in FUNCTIONS:
                raise ParseError(f"function '{tok.text}' needs arguments", self.current.pos, ("'('",))
            if tok.text == "x":
                return X
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text])
            return Param(tok.text)
        raise ParseError(f"unexpected {self._describe(tok)}", tok.pos, ("expression",))

    def call(self, name_tok: _Token) -> Expr:
        if name_tok.text not in FUNCTIONS:
            raise ParseError(f"unknown function '{name_tok.text}'", name_tok.pos,
                             tuple(sorted(FUNCTIONS)))
        self.expect("(")
        args = [self.expr()]
        while self.current.kind == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name_tok.text][0]
        if len(args) != arity:
            raise ParseError(f"function '{name_tok.text}' takes {arity} argument(s), got {len(args)}",
                             name_tok.pos)
        return Call(name_tok.text, tuple(args))


def parse(src: str) -> Expr:
    """
    Parses an integrand expression.

    Raises:
        ParseError: On lexical, syntax or arity errors; `position` is the
            0-based offset of the offending character or token.

    Example:
        >>> parse("besselj(v, 2*a*x)")
        Call(func='besselj', args=(Param(name='v'), BinOp(op='*', left=BinOp(op='*', left=Num(value=2.0), right=Param(name='a')), right=Var())))
    """
    if not src or not src.strip():
        raise ParseError("empty expression", 0, ("expression",))
    return _Parser(src).parse()


####################################################################################
# Printer and tree utilities
####################################################################################

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def _precedence(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PRECEDENCE[e.op]
    if isinstance(e, Neg):
        return _PRECEDENCE["neg"]
    return _ATOM


def _format_number(value: float) -> str:
    if value == math.pi:
        return "pi"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def to_string(e: Expr) -> str:
    """Canonical text form; parse(to_string(e)) rebuilds the same tree."""
    if isinstance(e, Num):
        return _format_number(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Neg):
        inner = to_string(e.operand)
        if _precedence(e.operand) < _PRECEDENCE["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_string(a) for a in e.args)})"
    prec = _PRECEDENCE[e.op]
    left, right = to_string(e.left), to_string(e.right)
    if e.op == "^":
        if _precedence(e.left) <= prec:
            left = f"({left})"
        if _precedence(e.right) < _PRECEDENCE["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _precedence(e.left) < prec:
        left = f"({left})"
    if _precedence(e.right) <= prec:
        right = f"({right})"
    if prec == 1:
        return f"{left} {e.op} {right}"
    return f"{left}{e.op}{right}"


def substitute(e: Expr, replacement: Expr) -> Expr:
    """Replaces every occurrence of x by `replacement`."""
    if isinstance(e, Var):
        return replacement
    if isinstance(e, (Num, Param)):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, replacement))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, replacement), substitute(e.right, replacement))
    return Call(e.func, tuple(substitute(a, replacement) for a in e.args))


def replace_params(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replaces the named parameters by expressions; other parameters are kept."""
    if isinstance(e, Param):
        return mapping.get(e.name, e)
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Neg):
        return Neg(replace_params(e.operand, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, replace_params(e.left, mapping), replace_params(e.right, mapping))
    return Call(e.func, tuple(replace_params(a, mapping) for a in e.args))


def free_parameters(e: Expr) -> FrozenSet[str]:
    if isinstance(e, Param):
        return frozenset({e.name})
    if isinstance(e, Neg):
        return free_parameters(e.operand)
    if isinstance(e, BinOp):
        return free_parameters(e.left) | free_parameters(e.right)
    if isinstance(e, Call):
        out: FrozenSet[str] = frozenset()
        for a in e.args:
            out |= free_parameters(a)
        return out
    return frozenset()


def contains_x(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Neg):
        return contains_x(e.operand)
    if isinstance(e, BinOp):
        return contains_x(e.left) or contains_x(e.right)
    if isinstance(e, Call):
        return any(contains_x(a) for a in e.args)
    return False


####################################################################################
# Evaluation
####################################################################################

def validate_params(params: ParamMap) -> None:
    for name, value in params.items():
        if not isinstance(name, str) or not name.isascii() or not name.isidentifier():
            raise ValueError(f"invalid parameter name {name!r}")
        if not math.isfinite(float(value)):
            raise ValueError(f"parameter '{name}' must be finite, got {value}")


def _power(base, exponent):
    b = np.asarray(base, dtype=np.float64)
    k = np.asarray(exponent, dtype=np.float64)
    if np.any((b < 0) & (k != np.round(k))):
        raise ExprDomainError("non-integer power of a negative number")
    return np.power(b, k)


def _eval(e: Expr, x: Value, params: ParamMap) -> Value:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Param):
        try:
            return float(params[e.name])
        except KeyError:
            raise UnboundParameterError(e.name) from None
    if isinstance(e, Neg):
        return -_eval(e.operand, x, params)
    if isinstance(e, BinOp):
        left = _eval(e.left, x, params)
        right = _eval(e.right, x, params)
        if e.op == "+":
            return np.add(left, right)
        if e.op == "-":
            return np.subtract(left, right)
        if e.op == "*":
            return np.multiply(left, right)
        if e.op == "/":
            return np.divide(left, right)
        return _power(left, right)
    func = FUNCTIONS[e.func][1]
    return func(*(_eval(a, x, params) for a in e.args))


def evaluate(e: Expr, x: Value, params: Optional[ParamMap] = None) -> Value:
    """
    Evaluates e at x (float or numpy array) with the given parameter bindings.

    Raises:
        UnboundParameterError: If a referenced parameter is missing.
        ExprDomainError: Non-integer power of a negative base, ln/sqrt outside
            their domain.
        SpecfunDomainError: Propagated from the special functions.

    Example:
        >>> evaluate(parse("2+3*4^2"), 0.0)
        50.0
    """
    params = params or {}
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        value = _eval(e, x, params)
    if np.ndim(x) == 0:
        return float(value)
    return np.broadcast_to(np.asarray(value, dtype=np.float64), np.shape(x)).astype(np.float64)


def compile_expr(e: Expr, params: Optional[ParamMap] = None) -> Callable[[Value], Value]:
    """Binds parameters once and returns a vectorized callable x -> values."""
    params = dict(params or {})
    validate_params(params)
    missing = free_parameters(e) - set(params)
    if missing:
        raise UnboundParameterError(sorted(missing)[0])

    def integrand(x: Value) -> Value:
        return evaluate(e, x, params)

    return integrand


####################################################################################
# Decay classification
####################################################################################

class DecayKind(str, Enum):
    EXP_DECAY = "EXP_DECAY"
    ALGEBRAIC = "ALGEBRAIC"
    OSCILLATORY = "OSCILLATORY"
    BOUNDED_UNKNOWN = "BOUNDED_UNKNOWN"


@dataclass(frozen=True)
class DecayClass:
    """
    Structural decay class of an integrand.

    EXP_DECAY carries exp(-rate * x^power); ALGEBRAIC carries the tail power
    (f ~ x^tail_power); OSCILLATORY carries the period of the oscillating
    factor in t = x^power and the phase of its zero set (first_zero).
    """
    kind: DecayKind
    power: float = 1.0
    rate: Optional[float] = None
    tail_power: Optional[float] = None
    period: Optional[float] = None
    first_zero: float = 0.0

    def __post_init__(self):
        if self.kind == DecayKind.OSCILLATORY and not (self.period and self.period > 0):
            raise ValueError("OSCILLATORY class needs a positive period")


UNKNOWN = DecayClass(DecayKind.BOUNDED_UNKNOWN)


def _constant(e: Expr, params: ParamMap) -> Optional[float]:
    if contains_x(e) or not free_parameters(e) <= set(params):
        return None
    try:
        value = evaluate(e, 1.0, params)
    except (ValueError, ArithmeticError):
        return None
    return value if math.isfinite(value) else None


def _monomial(e: Expr, params: ParamMap) -> Optional[Tuple[float, float]]:
    """(c, p) if e == c * x^p with constants folded, else None."""
    if isinstance(e, Var):
        return 1.0, 1.0
    const = _constant(e, params)
    if const is not None:
        return const, 0.0
    if isinstance(e, Neg):
        inner = _monomial(e.operand, params)
        return None if inner is None else (-inner[0], inner[1])
    if isinstance(e, BinOp):
        if e.op in ("*", "/"):
            a, b = _monomial(e.left, params), _monomial(e.right, params)
            if a is None or b is None:
                return None
            if e.op == "*":
                return a[0] * b[0], a[1] + b[1]
            if b[0] == 0:
                return None
            return a[0] / b[0], a[1] - b[1]
        if e.op == "^":
            k = _constant(e.right, params)
            base = _monomial(e.left, params)
            if k is None or base is None or (base[0] < 0 and not float(k).is_integer()):
                return None
            return base[0] ** k, base[1] * k
    return None


def _growth(e: Expr, params: ParamMap) -> Optional[float]:
    """Power q with |e| ~ x^q as x -> inf for rational-like expressions."""
    if not contains_x(e):
        return 0.0 if _constant(e, params) != 0.0 else None
    if isinstance(e, Var):
        return 1.0
    if isinstance(e, Neg):
        return _growth(e.operand, params)
    if isinstance(e, BinOp):
        if e.op == "^":
            k = _constant(e.right, params)
            g = _growth(e.left, params)
            return None if k is None or g is None else g * k
        a, b = _growth(e.left, params), _growth(e.right, params)
        if a is None or b is None:
            return None
        if e.op == "*":
            return a + b
        if e.op == "/":
            return a - b
        return max(a, b)
    if isinstance(e, Call) and e.func in ("sqrt", "abs"):
        g = _growth(e.args[0], params)
        if g is None:
            return None
        return g / 2.0 if e.func == "sqrt" else g
    return None


def _factors(e: Expr, sign: int = 1, out: Optional[List[Tuple[Expr, int]]] = None) -> List[Tuple[Expr, int]]:
    """Flattens products and quotients into (factor, +1 numerator / -1 denominator)."""
    out = [] if out is None else out
    if isinstance(e, BinOp) and e.op in ("*", "/"):
        _factors(e.left, sign, out)
        _factors(e.right, sign if e.op == "*" else -sign, out)
    elif isinstance(e, Neg):
        _factors(e.operand, sign, out)
    else:
        out.append((e, sign))
    return out


def classify_decay(e: Expr, params: Optional[ParamMap] = None) -> DecayClass:
    """
    Structural guess at how the integrand behaves as x -> inf.

    - an exp(-c x^p) factor with c > 0 gives EXP_DECAY;
    - a single sin/cos(c x^p) factor times a rational envelope gives
      OSCILLATORY with period 2 pi / c in t = x^p;
    - a rational-in-x^p expression gives ALGEBRAIC;
    - anything else (erfc, besselj, ...) is BOUNDED_UNKNOWN.

    Parameters that only enter coefficients or powers are folded when their
    values are supplied.

    Example:
        >>> classify_decay(parse("sin(x^2)")).period
        6.283185307179586
    """
    params = dict(params or {})
    decays: List[DecayClass] = []
    oscillations: List[DecayClass] = []
    envelope = 0.0
    opaque = False
    for factor, sign in _factors(e):
        if isinstance(factor, Call) and factor.func == "exp" and sign > 0:
            mono = _monomial(factor.args[0], params)
            if mono is None:
                return UNKNOWN
            c, p = mono
            if p > 0 and c < 0:
                decays.append(DecayClass(DecayKind.EXP_DECAY, power=p, rate=-c))
                continue
            if p == 0:
                continue
            return UNKNOWN
        if isinstance(factor, Call) and factor.func in ("sin", "cos") and sign > 0:
            mono = _monomial(factor.args[0], params)
            if mono is None or mono[1] <= 0 or mono[0] == 0:
                return UNKNOWN
            c, p = abs(mono[0]), mono[1]
            period = 2.0 * math.pi / c
            first_zero = 0.0 if factor.func == "sin" else period / 4.0
            oscillations.append(DecayClass(DecayKind.OSCILLATORY, power=p, period=period, first_zero=first_zero))
            continue
        g = _growth(factor, params)
        if g is None:
            opaque = True
            continue
        envelope += sign * g

    if decays:
        return min(decays, key=lambda d: -d.power)
    if opaque or len(oscillations) > 1:
        return UNKNOWN
    if oscillations:
        return oscillations[0]
    return DecayClass(DecayKind.ALGEBRAIC, tail_power=envelope)

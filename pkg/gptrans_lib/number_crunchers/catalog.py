"""
The identity catalog.

Every record pairs a left-hand computation plan with a right-hand plan (most
often a closed form), the free variables it ranges over and the points it is
checked at. Plans are plain data; verification.evaluate_plan turns them into
numbers.

Plan templates are expression strings in the variable x. Capitalised names in
a template (F, G, ...) are function slots: a FunctionRef says which binding of
the point fills the slot ("f" or "g") and what is substituted for x in it, so
the slot F with FunctionRef("f", "x^(1/n)") becomes f(x^(1/n)).
"""

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .quad import Strategy

Binding = Union[float, int, str]
Point = Dict[str, Binding]


class UnknownIdentityError(KeyError):
    def __init__(self, record_id: str, valid: Sequence[str]):
        self.record_id = record_id
        self.valid = list(valid)
        super().__init__(record_id)

    def __str__(self) -> str:
        return f"unknown identity '{self.record_id}' (valid ids: {', '.join(self.valid)})"


####################################################################################
# Plans
####################################################################################

@dataclass(frozen=True)
class FunctionRef:
    name: str = "f"
    argument: str = "x"


def _default_slots() -> Dict[str, FunctionRef]:
    return {"F": FunctionRef("f")}


@dataclass(frozen=True)
class ClosedForm:
    expr: str


@dataclass(frozen=True)
class TransformPlan:
    """coefficient * T{function; point}, T of the given kind and order."""
    kind: str
    point: str
    function: str = "F"
    slots: Mapping[str, FunctionRef] = field(default_factory=_default_slots)
    order: str = "n"
    coefficient: str = "1"
    raw: bool = False


@dataclass(frozen=True)
class IteratedPlan:
    """coefficient * T_outer{ inner_weight(x) * T_inner{function; inner_point(x)}; point }."""
    outer: str
    inner: str
    point: str
    function: str = "F"
    slots: Mapping[str, FunctionRef] = field(default_factory=_default_slots)
    order: str = "n"
    inner_weight: str = "1"
    inner_point: str = "x"
    coefficient: str = "1"


@dataclass(frozen=True)
class IntegralPlan:
    """
    coefficient * integral_0^inf integrand dx with an explicit strategy.

    `oscillation` names the oscillating factor (e.g. "sin(x^n)"); its class
    supplies the period and substitution power for OSCILLATORY and ABEL.
    """
    integrand: str
    strategy: Strategy = Strategy.AUTO
    slots: Mapping[str, FunctionRef] = field(default_factory=_default_slots)
    oscillation: Optional[str] = None
    coefficient: str = "1"


@dataclass(frozen=True)
class OuterIntegralPlan:
    """
    coefficient * integral_0^inf weight(x) * prod_k factor_k(x) dx, where each
    factor is a TransformPlan whose point is an expression in the outer x.
    """
    weight: str
    factors: Tuple[TransformPlan, ...]
    slots: Mapping[str, FunctionRef] = field(default_factory=_default_slots)
    oscillation: Optional[str] = None
    coefficient: str = "1"


@dataclass(frozen=True)
class LinearCombination:
    terms: Tuple[Tuple[str, "Plan"], ...]


Plan = Union[ClosedForm, TransformPlan, IteratedPlan, IntegralPlan, OuterIntegralPlan, LinearCombination]


####################################################################################
# Records
####################################################################################

class Interpretation(str, Enum):
    DIRECT = "DIRECT"
    ITERATED = "ITERATED"
    ABEL = "ABEL"


class ExpectedStatus(str, Enum):
    MUST_PASS = "MUST_PASS"
    AUDIT = "AUDIT"


@dataclass(frozen=True)
class FreeVar:
    """A free variable: a real with an optional lower bound, or one of a fixed set of choices."""
    name: str
    lower: Optional[float] = None
    inclusive: bool = False
    choices: Tuple[Binding, ...] = ()

    def admits(self, value: Binding) -> bool:
        if self.choices:
            return value in self.choices
        if isinstance(value, str):
            return False
        if self.lower is None:
            return True
        return value >= self.lower if self.inclusive else value > self.lower

    def describe(self) -> str:
        if self.choices:
            return f"{self.name} in {{{', '.join(str(c) for c in self.choices)}}}"
        if self.lower is None:
            return f"{self.name} real"
        return f"{self.name} {'>=' if self.inclusive else '>'} {self.lower:g}"


@dataclass(frozen=True)
class Candidate:
    """An alternative right-hand side carried next to the printed one."""
    label: str
    plan: Plan


@dataclass(frozen=True)
class CrossCheck:
    """
    A second equality evaluated at the same point. `when` restricts it to
    points whose bindings match; required checks must pass for the record to
    pass, the others are only reported in the note.
    """
    label: str
    lhs: Plan
    rhs: Plan
    required: bool = False
    when: Mapping[str, Binding] = field(default_factory=dict)

    def applies(self, point: Mapping[str, Binding]) -> bool:
        return all(point.get(k) == v for k, v in self.when.items())


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    title: str
    anchor: str
    lhs: Plan
    rhs: Plan
    free_vars: Tuple[FreeVar, ...]
    default_points: Tuple[Point, ...]
    interpretation: Interpretation = Interpretation.DIRECT
    expected: ExpectedStatus = ExpectedStatus.MUST_PASS
    candidates: Tuple[Candidate, ...] = ()
    cross_checks: Tuple[CrossCheck, ...] = ()
    remark: str = ""

    def free_var(self, name: str) -> Optional[FreeVar]:
        for var in self.free_vars:
            if var.name == name:
                return var
        return None

    def check_point(self, point: Mapping[str, Binding]) -> None:
        """
        Raises:
            ValueError: If a binding is missing or outside its range.
        """
        for var in self.free_vars:
            if var.name not in point:
                raise ValueError(f"{self.id}: missing binding for '{var.name}' ({var.describe()})")
            if not var.admits(point[var.name]):
                raise ValueError(f"{self.id}: {var.name}={point[var.name]!r} violates {var.describe()}")


####################################################################################
# Builders
####################################################################################

# Decaying test functions shared by the reduction records.
DECAYING_CORPUS = ("exp(-x)", "exp(-x^2)", "exp(-x^4)", "1/(1+x^2)^2")
GAUSSIAN = "exp(-x^2)"


def grid(**axes: Iterable[Binding]) -> Tuple[Point, ...]:
    """Cartesian product of the axes, in argument order."""
    names = list(axes)
    return tuple(dict(zip(names, values)) for values in itertools.product(*(tuple(axes[n]) for n in names)))


def _f(argument: str = "x") -> Dict[str, FunctionRef]:
    return {"F": FunctionRef("f", argument)}


def _fg(f_argument: str = "x", g_argument: str = "x") -> Dict[str, FunctionRef]:
    return {"F": FunctionRef("f", f_argument), "G": FunctionRef("g", g_argument)}


def _function_var(name: str = "f", choices: Sequence[str] = DECAYING_CORPUS) -> FreeVar:
    return FreeVar(name, choices=tuple(choices))


def _positive(name: str) -> FreeVar:
    return FreeVar(name, lower=0.0)


def _order(*choices: int) -> FreeVar:
    return FreeVar("n", choices=tuple(choices))


NO_SLOTS: Dict[str, FunctionRef] = {}


def _reduction_records() -> List[IdentityRecord]:
    corpus_y = dict(f=DECAYING_CORPUS, y=(0.5, 1.0, 2.0))
    y_f = (_function_var(), _positive("y"))
    return [
        IdentityRecord(
            "R1", "L_2 as a Laplace transform of f(sqrt x) at y^2", "l2-to-laplace",
            lhs=TransformPlan("l2", "y", raw=True),
            rhs=TransformPlan("laplace", "y^2", slots=_f("x^(1/2)"), coefficient="1/2"),
            free_vars=y_f, default_points=grid(**corpus_y),
        ),
        IdentityRecord(
            "R2", "Laplace as an L_2 transform of f(x^2) at sqrt y", "laplace-to-l2",
            lhs=TransformPlan("laplace", "y", raw=True),
            rhs=TransformPlan("l2", "sqrt(y)", slots=_f("x^2"), coefficient="2"),
            free_vars=y_f, default_points=grid(**corpus_y),
        ),
        IdentityRecord(
            "R3", "L_4 through the Laplace and L_2 transforms", "l4-reductions",
            lhs=TransformPlan("ln", "y", order="4", raw=True),
            rhs=TransformPlan("laplace", "y^4", slots=_f("x^(1/4)"), coefficient="1/4"),
            free_vars=y_f, default_points=grid(**corpus_y),
            cross_checks=(CrossCheck(
                "L_4 = 1/2 L_2{f(x^(1/2)); y^2}",
                lhs=TransformPlan("ln", "y", order="4", raw=True),
                rhs=TransformPlan("l2", "y^2", slots=_f("x^(1/2)"), coefficient="1/2"),
                required=True),),
        ),
        IdentityRecord(
            "R4", "L_n as a Laplace transform of f(x^(1/n)) at y^n", "ln-to-laplace",
            lhs=TransformPlan("ln", "y", raw=True),
            rhs=TransformPlan("laplace", "y^n", slots=_f("x^(1/n)"), coefficient="1/n"),
            free_vars=y_f + (_order(1, 2, 4),), default_points=grid(n=(1, 2, 4), **corpus_y),
        ),
        IdentityRecord(
            "R5", "L_2n as a Laplace transform of f(x^(1/2n)) at y^2n", "l2n-to-laplace",
            lhs=TransformPlan("l2n", "y", raw=True),
            rhs=TransformPlan("laplace", "y^(2*n)", slots=_f("x^(1/(2*n))"), coefficient="1/(2*n)"),
            free_vars=y_f + (_order(1, 2, 3),), default_points=grid(n=(1, 2, 3), **corpus_y),
        ),
        IdentityRecord(
            "R6", "L_n as an L_2 transform of f(x^(2/n)) at y^(n/2)", "ln-to-l2",
            lhs=TransformPlan("ln", "y", raw=True),
            rhs=TransformPlan("l2", "y^(n/2)", slots=_f("x^(2/n)"), coefficient="2/n"),
            free_vars=y_f + (_order(1, 2, 4),), default_points=grid(n=(1, 2, 4), **corpus_y),
            expected=ExpectedStatus.AUDIT,
            remark="for n = 1 the right side is 2 L_2{f(x^2); sqrt y}, the Laplace/L_2 relation",
        ),
        IdentityRecord(
            "R7", "L_2n as an L_2 transform of f(x^(1/n)) at y^n", "l2n-to-l2",
            lhs=TransformPlan("l2n", "y", raw=True),
            rhs=TransformPlan("l2", "y^n", slots=_f("x^(1/n)"), coefficient="1/n"),
            free_vars=y_f + (_order(1, 2, 3),), default_points=grid(n=(1, 2, 3), **corpus_y),
        ),
        IdentityRecord(
            "R8", "P_n as a Stieltjes transform of f(x^(1/n)) at y^n", "pn-to-stieltjes",
            lhs=TransformPlan("pn", "y", raw=True),
            rhs=TransformPlan("stieltjes", "y^n", slots=_f("x^(1/n)"), coefficient="1/n"),
            free_vars=y_f + (_order(1, 2, 4),), default_points=grid(n=(1, 2, 4), **corpus_y),
        ),
        IdentityRecord(
            "R9", "P_n as a Widder potential transform of f(x^(2/n)) at y^(n/2)", "pn-to-widder",
            lhs=TransformPlan("pn", "y", raw=True),
            rhs=TransformPlan("widder", "y^(n/2)", slots=_f("x^(2/n)"), coefficient="2/n"),
            free_vars=y_f + (_order(1, 2, 4),), default_points=grid(n=(1, 2, 4), **corpus_y),
            expected=ExpectedStatus.AUDIT,
        ),
        IdentityRecord(
            "R10", "P_2n as a Widder potential transform of f(x^(1/n)) at y^n", "p2n-to-widder",
            lhs=TransformPlan("p2n", "y", raw=True),
            rhs=TransformPlan("widder", "y^n", slots=_f("x^(1/n)"), coefficient="1/n"),
            free_vars=y_f + (_order(1, 2, 3),), default_points=grid(n=(1, 2, 3), **corpus_y),
        ),
    ]


def _classical_parseval_records() -> List[IdentityRecord]:
    fg_vars = (_function_var("f", ("exp(-x)", "exp(-x^2)", "x*exp(-x)")),
               _function_var("g", ("exp(-x)", "exp(-x^2)", "exp(-2*x)")))
    g_slot = {"F": FunctionRef("g")}
    return [
        IdentityRecord(
            "G1", "Laplace exchange: int f L{g} = int g L{f}", "laplace-parseval",
            lhs=OuterIntegralPlan("F", (TransformPlan("laplace", "x", slots=g_slot),)),
            rhs=OuterIntegralPlan("F", (TransformPlan("laplace", "x"),), slots=g_slot),
            free_vars=fg_vars,
            default_points=({"f": "exp(-x)", "g": "exp(-x^2)"}, {"f": "exp(-x^2)", "g": "exp(-2*x)"}),
            interpretation=Interpretation.ITERATED,
        ),
        IdentityRecord(
            "Y1", "Laplace-Laplace-Stieltjes exchange: int L{f} L{g} = int g S{f}",
            "laplace-laplace-stieltjes-parseval",
            lhs=OuterIntegralPlan("1", (TransformPlan("laplace", "x"), TransformPlan("laplace", "x", slots=g_slot)),
                                  slots=NO_SLOTS),
            rhs=OuterIntegralPlan("F", (TransformPlan("stieltjes", "x"),), slots=g_slot),
            free_vars=fg_vars,
            default_points=({"f": "x*exp(-x)", "g": "exp(-x^2)"}, {"f": "x*exp(-x)", "g": "exp(-x)"}),
            interpretation=Interpretation.ITERATED,
        ),
        IdentityRecord(
            "SS1", "Widder potential exchange: int y P{f; y} g(y) = int x P{g; x} f(x)", "widder-parseval",
            lhs=OuterIntegralPlan("x*G", (TransformPlan("widder", "x"),), slots=_fg()),
            rhs=OuterIntegralPlan("x*F", (TransformPlan("widder", "x", slots=g_slot),)),
            free_vars=fg_vars,
            default_points=({"f": "exp(-x^2)", "g": "exp(-x)"}, {"f": "exp(-x)", "g": "exp(-2*x)"}),
            interpretation=Interpretation.ITERATED,
        ),
        IdentityRecord(
            "W1", "P_4 exchange: int x^3 f P_4{g} = int u^3 g P_4{f}", "p4-parseval",
            lhs=OuterIntegralPlan("x^3*F", (TransformPlan("pn", "x", order="4", slots=g_slot),)),
            rhs=OuterIntegralPlan("x^3*G", (TransformPlan("pn", "x", order="4"),), slots=_fg()),
            free_vars=fg_vars,
            default_points=({"f": "exp(-x^2)", "g": "exp(-x)"}, {"f": "exp(-x)", "g": "exp(-2*x)"}),
            interpretation=Interpretation.ITERATED,
        ),
    ]


def _nested_records() -> List[IdentityRecord]:
    gaussian_var = _function_var("f", (GAUSSIAN, "exp(-x^4)", "exp(-x)"))
    recip_f = {"F": FunctionRef("f"), "G": FunctionRef("f", "1/x")}
    l2n_after_ln_first = IntegralPlan("x^(n-1)*F", Strategy.DECAY)
    l2n_after_ln_tail = IntegralPlan("x^(-2*n-1)*G*erfcx(1/(2*x^n*y^n))", Strategy.ALGEBRAIC, slots=recip_f)
    nested_points = grid(f=(GAUSSIAN,), n=(1, 2), y=(1.0, 2.0))
    return [
        IdentityRecord(
            "L1", "L_n after L_2n as an erfcx-weighted integral", "ln-after-l2n",
            lhs=IteratedPlan("ln", "l2n", "y"),
            rhs=IntegralPlan("x^(n-1)*F*erfcx(y^n/(2*x^n))", Strategy.DECAY, coefficient="sqrt(pi)/(2*n)"),
            free_vars=(gaussian_var, _order(1, 2, 4), _positive("y")),
            default_points=grid(f=(GAUSSIAN,), n=(1, 2), y=(0.5, 1.0)),
            interpretation=Interpretation.ITERATED,
        ),
        IdentityRecord(
            "L2", "L_2n after L_n through a reciprocal-argument integral", "l2n-after-ln",
            lhs=IteratedPlan("l2n", "ln", "y"),
            rhs=LinearCombination((("1/(2*n*y^(2*n))", l2n_after_ln_first),
                                   ("-sqrt(pi)/(4*n*y^(3*n))", l2n_after_ln_tail))),
            free_vars=(gaussian_var, _order(1, 2, 4), _positive("y")),
            default_points=nested_points,
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
            candidates=(Candidate("coefficient 1/(2 y^(3n)) on the reciprocal integral",
                                  LinearCombination((("1/(2*n*y^(2*n))", l2n_after_ln_first),
                                                     ("-1/(2*y^(3*n))", l2n_after_ln_tail)))),),
            remark="completing the square needs x^n in u^n + x^n/(2 y^2n); the x reading is not used",
        ),
        IdentityRecord(
            "C1", "L_2n after L_n through L_n after L_2n at 1/y", "l2n-after-ln-as-iterate",
            lhs=IteratedPlan("l2n", "ln", "y"),
            rhs=LinearCombination((
                ("1/(2*n*y^(2*n))", l2n_after_ln_first),
                ("-1/(2*y^(3*n))", IteratedPlan("ln", "l2n", "1/y", function="x^(-3*n)*G", slots=recip_f)),
            )),
            free_vars=(gaussian_var, _order(1, 2, 4), _positive("y")),
            default_points=nested_points,
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
        ),
        IdentityRecord(
            "C2", "L_n through L_m by rescaling", "ln-lm-rescaling",
            lhs=TransformPlan("ln", "y", raw=True),
            rhs=TransformPlan("ln", "y^(n/m)", slots=_f("x^(m/n)"), order="m", coefficient="m/n"),
            free_vars=(_function_var(), _positive("y"), _order(2, 4), FreeVar("m", choices=(1, 2))),
            default_points=tuple(
                dict(f=f, n=n, m=m, y=y)
                for (n, m) in ((2, 1), (4, 2), (4, 1)) for f in DECAYING_CORPUS for y in (0.5, 1.0, 2.0)
            ),
        ),
        IdentityRecord(
            "L3", "second iterate of L_2n is P_2n / 2n", "l2n-iteration",
            lhs=IteratedPlan("l2n", "l2n", "z"),
            rhs=TransformPlan("p2n", "z", coefficient="1/(2*n)"),
            free_vars=(_function_var("f", (GAUSSIAN, "exp(-x^4)", "1/(1+x^2)^2")), _order(1, 2, 3), _positive("z")),
            default_points=(
                {"f": GAUSSIAN, "n": 1, "z": 1.0}, {"f": GAUSSIAN, "n": 2, "z": 0.5},
                {"f": "exp(-x^4)", "n": 1, "z": 2.0}, {"f": "exp(-x^4)", "n": 3, "z": 1.0},
            ),
            interpretation=Interpretation.ITERATED,
        ),
    ]


def _erfcx_examples() -> List[IdentityRecord]:
    y_n = (_order(1, 2, 4), _positive("y"))
    abel_note = "Abel-regularized reading of the printed integral"
    return [
        IdentityRecord(
            "E1", "erfcx integral against x^(-2n-1) exp(-x^-2n)", "erfcx-reciprocal-power-integral",
            lhs=IntegralPlan("x^(-2*n-1)*exp(-x^(-2*n))*erfcx(1/(2*x^n*y^n))", Strategy.ALGEBRAIC,
                             slots=NO_SLOTS),
            rhs=ClosedForm("y^n/(n*(2*y^n+1))"),
            free_vars=(_order(1, 2, 4), FreeVar("y", lower=1.0, inclusive=True)),
            default_points=grid(n=(1, 2), y=(1.0, 2.0)),
            expected=ExpectedStatus.AUDIT,
        ),
        IdentityRecord(
            "E2", "sin x against erfcx(y/2x)", "sine-erfcx-integral",
            lhs=IteratedPlan("laplace", "l2", "y", function="sin(x)", slots=NO_SLOTS,
                             coefficient="2/sqrt(pi)"),
            rhs=ClosedForm("sqrt(pi)*y*erfcx(y)"),
            free_vars=(_positive("y"),),
            default_points=grid(y=(0.5, 1.0, 2.0)),
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
            cross_checks=(CrossCheck(
                abel_note,
                lhs=IntegralPlan("sin(x)*erfcx(y/(2*x))", Strategy.ABEL, slots=NO_SLOTS, oscillation="sin(x)"),
                rhs=ClosedForm("sqrt(pi)*y*erfcx(y)")),),
        ),
        IdentityRecord(
            "E3", "x^(n-1) sin(x^n) against erfcx(y^n/2x^n)", "sine-power-erfcx-integral",
            lhs=IteratedPlan("ln", "l2n", "y", function="sin(x^n)", slots=NO_SLOTS, coefficient="2*n/sqrt(pi)"),
            rhs=ClosedForm("sqrt(pi)/n*y^n*erfcx(y^n)"),
            free_vars=y_n,
            default_points=grid(n=(1, 2), y=(0.5, 1.0)),
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
            cross_checks=(CrossCheck(
                abel_note,
                lhs=IntegralPlan("x^(n-1)*sin(x^n)*erfcx(y^n/(2*x^n))", Strategy.ABEL, slots=NO_SLOTS,
                                 oscillation="sin(x^n)"),
                rhs=ClosedForm("sqrt(pi)/n*y^n*erfcx(y^n)")),),
        ),
        IdentityRecord(
            "E4", "cos(x^n)/x against erfcx(y^n/2x^n)", "cosine-power-erfcx-integral",
            lhs=IteratedPlan("ln", "l2n", "y", function="cos(x^n)/x^n", slots=NO_SLOTS,
                             coefficient="2*n/sqrt(pi)"),
            rhs=ClosedForm("4*sqrt(pi)/n*y^n*(2*y^(2*n)+3)*erfcx(y^n)+8/n*y^(2*n)"),
            free_vars=y_n,
            default_points=grid(n=(1, 2), y=(0.5, 1.0)),
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
            cross_checks=(CrossCheck(
                abel_note,
                lhs=IntegralPlan("cos(x^n)/x*erfcx(y^n/(2*x^n))", Strategy.ABEL, slots=NO_SLOTS,
                                 oscillation="cos(x^n)"),
                rhs=ClosedForm("4*sqrt(pi)/n*y^n*(2*y^(2*n)+3)*erfcx(y^n)+8/n*y^(2*n)")),),
            remark="the right side grows like y^(3n) while the left side stays bounded",
        ),
    ]


def _p2n_examples() -> List[IdentityRecord]:
    free = (_order(1, 2, 3), _positive("z"), _positive("y"))
    return [
        IdentityRecord(
            "E5", "P_2n of sin(z^n x^n)", "p2n-of-sine",
            lhs=TransformPlan("p2n", "y", function="sin(z^n*x^n)", slots=NO_SLOTS),
            rhs=ClosedForm("pi/n*exp(-z^n*y^n)"),
            free_vars=free,
            default_points=({"n": 1, "z": 1.0, "y": 1.0}, {"n": 1, "z": 0.5, "y": 2.0}, {"n": 2, "z": 1.0, "y": 1.0}),
            expected=ExpectedStatus.AUDIT,
            candidates=(Candidate("constant pi/(2n)", ClosedForm("pi/(2*n)*exp(-z^n*y^n)")),),
            remark="printed constant pi/n; the last line of the derivation gives pi/(2n)",
        ),
        IdentityRecord(
            "E6", "P_2n of cos(z^n x^n)/x^n", "p2n-of-cosine-over-power",
            lhs=TransformPlan("p2n", "y", function="cos(z^n*x^n)/x^n", slots=NO_SLOTS),
            rhs=ClosedForm("pi/(2*n*y^n)*exp(-z^n*y^n)"),
            free_vars=free,
            default_points=({"n": 1, "z": 1.0, "y": 1.0}, {"n": 1, "z": 2.0, "y": 0.5}, {"n": 2, "z": 1.0, "y": 1.0}),
            expected=ExpectedStatus.AUDIT,
        ),
    ]


def _parseval_goldstein_records() -> List[IdentityRecord]:
    g_slot = {"F": FunctionRef("g")}
    member_first = OuterIntegralPlan("x^(2*n-1)", (TransformPlan("l2n", "x"), TransformPlan("l2n", "x", slots=g_slot)),
                                     slots=NO_SLOTS)
    member_second = OuterIntegralPlan("x^(2*n-1)*F", (TransformPlan("p2n", "x", slots=g_slot),))
    member_third = OuterIntegralPlan("x^(2*n-1)*G", (TransformPlan("p2n", "x"),), slots=_fg())
    pairs = (
        {"f": GAUSSIAN, "g": GAUSSIAN, "n": 1},
        {"f": GAUSSIAN, "g": "exp(-4*x^2)", "n": 1},
        {"f": "exp(-x^4)", "g": "exp(-x^4)", "n": 2},
    )
    free = (_function_var("f", (GAUSSIAN, "exp(-x^4)")), _function_var("g", (GAUSSIAN, "exp(-4*x^2)", "exp(-x^4)")),
            _order(1, 2, 3))

    def scaled(plan: OuterIntegralPlan, coefficient: str) -> OuterIntegralPlan:
        return OuterIntegralPlan(plan.weight, plan.factors, plan.slots, plan.oscillation, coefficient)

    return [
        IdentityRecord(
            "T1a", "int y^(2n-1) L_2n{f} L_2n{g} = (1/2n) int x^(2n-1) f P_2n{g}", "parseval-goldstein-f-side",
            lhs=member_first, rhs=scaled(member_second, "1/(2*n)"),
            free_vars=free, default_points=pairs, interpretation=Interpretation.ITERATED,
        ),
        IdentityRecord(
            "T1b", "int y^(2n-1) L_2n{f} L_2n{g} = (1/2n) int u^(2n-1) g P_2n{f}", "parseval-goldstein-g-side",
            lhs=member_first, rhs=scaled(member_third, "1/(2*n)"),
            free_vars=free, default_points=pairs, interpretation=Interpretation.ITERATED,
        ),
        IdentityRecord(
            "T1c", "int x^(2n-1) f P_2n{g} = int u^(2n-1) g P_2n{f}", "parseval-goldstein-exchange",
            lhs=member_second, rhs=member_third,
            free_vars=free, default_points=pairs, interpretation=Interpretation.ITERATED,
        ),
    ]


def _weighted_iterate_records() -> List[IdentityRecord]:
    free = (_function_var("f", (GAUSSIAN, "exp(-x^4)", "exp(-x)")), _order(1, 2, 4), _positive("z"))
    points = ({"f": GAUSSIAN, "n": 1, "z": 1.0}, {"f": GAUSSIAN, "n": 2, "z": 0.5}, {"f": "exp(-x)", "n": 1, "z": 2.0})
    reciprocal_point = "1/(2^(1/n)*x)"
    return [
        IdentityRecord(
            "C3", "L_2n of y^-n L_2n{f; 1/(2^(1/n) y)} as L_n{x^n f}", "l2n-iterate-reciprocal-point",
            lhs=IteratedPlan("l2n", "l2n", "z", inner_weight="x^(-n)", inner_point=reciprocal_point),
            rhs=TransformPlan("ln", "z", function="x^n*F", coefficient="sqrt(pi)/(2*n*z^n)"),
            free_vars=free, default_points=points,
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
        ),
        IdentityRecord(
            "C4", "sin(z^n x^n)-weighted P_2n integral as L_n{x^n f}", "sine-weighted-p2n",
            lhs=OuterIntegralPlan("x^(2*n-1)*sin(z^n*x^n)", (TransformPlan("p2n", "x"),), slots=NO_SLOTS,
                                  oscillation="sin(z^n*x^n)"),
            rhs=TransformPlan("ln", "z", function="x^n*F", coefficient="pi/(2*n)"),
            free_vars=free, default_points=points,
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
            remark="the printed left side names g and the right side f; checked with g = f",
        ),
        IdentityRecord(
            "C5", "L_2n of y^-3n L_2n{f; 1/(2^(1/n) y)} as L_n{f}", "l2n-iterate-cubic-weight",
            lhs=IteratedPlan("l2n", "l2n", "z", inner_weight="x^(-3*n)", inner_point=reciprocal_point),
            rhs=TransformPlan("ln", "z", coefficient="sqrt(pi)/n"),
            free_vars=free, default_points=points,
            interpretation=Interpretation.ITERATED, expected=ExpectedStatus.AUDIT,
        ),
    ]


def _closed_form_examples() -> List[IdentityRecord]:
    erfc_printed = ("1/(n*z^n)*(sqrt(pi)/z^n-1/(2*a^n))"
                    "-sqrt(pi)/(2*n)*exp(z^n/(4*a^(2*n)))*(1/z^(2*n)-1/(2*a^(2*n)))*erfc(z^n/(2*a^n))")
    erfc_derived = ("1/(n*z^n)*(sqrt(pi)/z^n-1/(2*a^n))"
                    "-sqrt(pi)/(2*n)*(1/z^(2*n)-1/(2*a^(2*n)))*erfcx(z^n/(2*a^n))")
    bessel_rhs = "a^(n*v)*2^(2*v)/(n*sqrt(pi))*(z^(2*n)+4*a^(2*n))^(-v-1/2)*gamma(v+1/2)"
    return [
        IdentityRecord(
            "X1", "L_n of x^n erfc(a^n x^n)", "ln-of-power-times-erfc",
            lhs=TransformPlan("ln", "z", function="x^n*erfc(a^n*x^n)", slots=NO_SLOTS),
            rhs=ClosedForm(erfc_printed),
            free_vars=(_order(1, 2, 4), _positive("a"), _positive("z")),
            default_points=({"n": 1, "a": 1.0, "z": 1.0}, {"n": 2, "a": 1.0, "z": 1.0}, {"n": 1, "a": 0.5, "z": 2.0}),
            expected=ExpectedStatus.AUDIT,
            candidates=(Candidate("exponent z^(2n)/(4 a^(2n))", ClosedForm(erfc_derived)),),
            remark="the closed form prints exp(z^n/4a^2n); the derivation carries exp(z^2n/4a^2n)",
        ),
        IdentityRecord(
            "X2", "L_n of x^(nv) J_v(2 a^n x^n)", "ln-of-bessel",
            lhs=TransformPlan("ln", "z", function="x^(n*v)*besselj(v, 2*a^n*x^n)", slots=NO_SLOTS),
            rhs=ClosedForm(bessel_rhs),
            free_vars=(_order(1, 2, 4), FreeVar("v", lower=-0.5), _positive("a"), _positive("z")),
            default_points=(
                {"n": 1, "v": 0.0, "a": 1.0, "z": 1.0}, {"n": 1, "v": 0.0, "a": 0.5, "z": 2.0},
                {"n": 2, "v": 0.5, "a": 1.0, "z": 1.0}, {"n": 1, "v": 1.0, "a": 0.5, "z": 1.0},
            ),
            expected=ExpectedStatus.AUDIT,
            cross_checks=(CrossCheck(
                "classical L{J_0(2ax); z} = (z^2+4a^2)^(-1/2)",
                lhs=TransformPlan("laplace", "z", function="besselj(0, 2*a*x)", slots=NO_SLOTS),
                rhs=ClosedForm("(z^2+4*a^2)^(-1/2)"),
                required=True, when={"n": 1, "v": 0.0}),),
        ),
    ]


_CATALOG: Optional[Tuple[IdentityRecord, ...]] = None


def builtin_catalog() -> List[IdentityRecord]:
    """All built-in identity records, in catalog order."""
    global _CATALOG
    if _CATALOG is None:
        records = (_reduction_records() + _classical_parseval_records() + _nested_records()
                   + _erfcx_examples() + _p2n_examples() + _parseval_goldstein_records()
                   + _weighted_iterate_records() + _closed_form_examples())
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            raise RuntimeError("duplicate identity ids in the catalog")
        _CATALOG = tuple(records)
    return list(_CATALOG)


def record_ids() -> List[str]:
    return [r.id for r in builtin_catalog()]


def get_record(record_id: str) -> IdentityRecord:
    """
    Raises:
        UnknownIdentityError: If no record has this id (case-insensitive).
    """
    for record in builtin_catalog():
        if record.id.lower() == record_id.strip().lower():
            return record
    raise UnknownIdentityError(record_id, record_ids())


def record_ids_by_anchor() -> Dict[str, str]:
    return {r.anchor: r.id for r in builtin_catalog()}


_ID_PARTS = re.compile(r"([A-Za-z]+)(\d*)(.*)")


def record_sort_key(record_id: str) -> Tuple[str, int, str]:
    """Id order used by reports: letters, then the number, then any suffix (R2 < R10 < T1a < T1b)."""
    letters, number, suffix = _ID_PARTS.fullmatch(record_id).groups()
    return letters.upper(), int(number or 0), suffix

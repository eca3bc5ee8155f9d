"""
The eight transform kinds and the nested/iterated transforms built on them.

Every kind is x^(m-1) K(x^m, y^m) integrated against f(x) over (0, inf), with
K(t, Y) = exp(-Y t) (Laplace family) or 1/(t + Y) (Stieltjes family):

    kind        family      m
    laplace     laplace     1
    l2          laplace     2
    ln          laplace     n      n a power of two
    l2n         laplace     2n     kernel x^(2n-1) exp(-y^2n x^2n)
    stieltjes   stieltjes   1
    widder      stieltjes   2
    pn          stieltjes   n      n a power of two
    p2n         stieltjes   2n

eval_transform substitutes t = x^m and integrates (1/m) K(t, y^m) f(t^(1/m));
eval_transform_raw integrates the defining integral in x. Oscillatory f are
first moved to s = x^p, where p is the power inside the sine/cosine, so the
oscillation cells have exact, evenly spaced boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .expr import DecayClass, DecayKind, Expr, ParamMap, classify_decay, compile_expr
from .quad import (
    QuadOptions,
    QuadResult,
    Status,
    Strategy,
    integrate_algebraic,
    integrate_decay,
    integrate_oscillatory,
    substitute_power,
)

Function = Union[Expr, Callable[[np.ndarray], np.ndarray]]

# Iterated transforms: inner quadratures run at a tenth of the outer tolerance.
INNER_TOL_FACTOR = 0.1
INNER_MIN_EVALS = 20_000
OUTER_MIN_EVALS = 8_000


class InvalidTransformError(ValueError):
    pass


class InnerQuadratureError(RuntimeError):
    """An inner transform of an iterated computation failed at one outer node."""

    def __init__(self, point: float, result: QuadResult):
        self.point = point
        self.result = result
        super().__init__(f"inner transform failed at u={point!r}: status {result.status.value}, "
                         f"value {result.value!r}, err_est {result.err_est!r}")


class Family(str, Enum):
    LAPLACE = "laplace"
    STIELTJES = "stieltjes"


class KindName(str, Enum):
    LAPLACE = "laplace"
    L2 = "l2"
    LN = "ln"
    L2N = "l2n"
    STIELTJES = "stieltjes"
    PN = "pn"
    P2N = "p2n"
    WIDDER = "widder"


_FAMILY = {
    KindName.LAPLACE: Family.LAPLACE, KindName.L2: Family.LAPLACE,
    KindName.LN: Family.LAPLACE, KindName.L2N: Family.LAPLACE,
    KindName.STIELTJES: Family.STIELTJES, KindName.WIDDER: Family.STIELTJES,
    KindName.PN: Family.STIELTJES, KindName.P2N: Family.STIELTJES,
}
ORDERED_KINDS = (KindName.LN, KindName.L2N, KindName.PN, KindName.P2N)


@dataclass(frozen=True)
class CanonicalForm:
    family: Family
    power: int
    coefficient: float


@dataclass(frozen=True)
class TransformKind:
    name: KindName
    n: int = 1

    def __post_init__(self):
        if self.name not in ORDERED_KINDS:
            object.__setattr__(self, "n", 1)
            return
        if int(self.n) != self.n or self.n < 1:
            raise InvalidTransformError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.name in (KindName.LN, KindName.PN) and self.n & (self.n - 1):
            raise InvalidTransformError(f"n must be a power of two, got {self.n}")

    @classmethod
    def parse(cls, name: str, n: float = 1) -> "TransformKind":
        """Builds a kind from its command-line name, e.g. TransformKind.parse("p2n", 2)."""
        try:
            kind = KindName(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in KindName)
            raise InvalidTransformError(f"unknown transform kind '{name}' (valid: {valid})") from None
        if kind in ORDERED_KINDS and float(n) != int(n):
            raise InvalidTransformError(f"n must be a positive integer, got {n}")
        return cls(kind, int(n))

    @property
    def family(self) -> Family:
        return _FAMILY[self.name]

    @property
    def power(self) -> int:
        if self.name in (KindName.LAPLACE, KindName.STIELTJES):
            return 1
        if self.name in (KindName.L2, KindName.WIDDER):
            return 2
        if self.name in (KindName.LN, KindName.PN):
            return self.n
        return 2 * self.n

    def canonical_form(self) -> CanonicalForm:
        return CanonicalForm(self.family, self.power, 1.0 / self.power)

    def __str__(self) -> str:
        return f"{self.name.value}(n={self.n})" if self.name in ORDERED_KINDS else self.name.value


def canonical_form(kind: TransformKind) -> CanonicalForm:
    return kind.canonical_form()


@dataclass(frozen=True)
class TransformRequest:
    kind: TransformKind
    f: Expr
    params: ParamMap = field(default_factory=dict)
    point: float = 1.0
    opts: QuadOptions = field(default_factory=QuadOptions)

    def __post_init__(self):
        if not (math.isfinite(self.point) and self.point > 0):
            raise InvalidTransformError(f"evaluation point must be a positive real, got {self.point}")


####################################################################################
# Single transforms
####################################################################################

def kernel_weight(kind: TransformKind, x: np.ndarray, y: float) -> np.ndarray:
    """The defining kernel of `kind` at integration nodes x and point y."""
    m = kind.power
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        lead = np.power(x, m - 1) if m > 1 else np.ones_like(x)
        if kind.family == Family.LAPLACE:
            return lead * np.exp(-np.power(y * x, m))
        return lead / (np.power(x, m) + y ** m)


def _as_callable(f: Function, params: Optional[ParamMap]):
    if callable(f):
        return f
    return compile_expr(f, params or {})


def oscillation_of(f: Expr, params: Optional[ParamMap] = None) -> Optional[DecayClass]:
    """The OSCILLATORY class of f, or None when f is not a sine/cosine times an envelope."""
    cls = classify_decay(f, params)
    return cls if cls.kind == DecayKind.OSCILLATORY else None


def transform(kind: TransformKind, f: Callable[[np.ndarray], np.ndarray], point: float,
              opts: Optional[QuadOptions] = None, oscillation: Optional[DecayClass] = None,
              raw: bool = False, check_divergence: bool = True) -> QuadResult:
    """
    Transform of a vectorized callable at one point.

    Parameters:
        kind: Transform kind.
        f: Vectorized callable on (0, inf).
        point: Positive evaluation point.
        opts: Quadrature options.
        oscillation: OSCILLATORY decay class of f, if any.
        raw: Integrate the defining integral in x instead of the reduced form.
        check_divergence: Passed to the oscillatory engine.
    """
    opts = opts or QuadOptions()
    if not (point > 0 and math.isfinite(point)):
        raise InvalidTransformError(f"evaluation point must be a positive real, got {point}")
    family = kind.family
    m = kind.power
    point = float(point)

    def in_x(x: np.ndarray) -> np.ndarray:
        return kernel_weight(kind, x, point) * f(x)

    scale = point ** m
    coefficient = 1.0 / m
    inv = 1.0 / m

    def reduced(t: np.ndarray) -> np.ndarray:
        inner = f(np.power(t, inv)) if m > 1 else f(t)
        if family == Family.LAPLACE:
            return coefficient * np.exp(-scale * t) * inner
        return coefficient * inner / (t + scale)

    plain = replace(opts, oscillation_period_hint=None, strategy=Strategy.AUTO)
    if oscillation is not None:
        # cells live in s = x^p = t^(p/m), where the zeros are evenly spaced
        p = oscillation.power
        osc_opts = replace(opts, oscillation_period_hint=oscillation.period, strategy=Strategy.AUTO)
        if raw:
            if family == Family.LAPLACE:
                return integrate_decay(in_x, plain)
            return integrate_oscillatory(substitute_power(in_x, p), oscillation.period, osc_opts,
                                         first_zero=oscillation.first_zero, check_divergence=check_divergence)
        g = substitute_power(reduced, p / m)
        if family == Family.LAPLACE:
            return integrate_oscillatory(g, oscillation.period, osc_opts, first_zero=oscillation.first_zero,
                                         check_divergence=check_divergence)
        return integrate_algebraic(g, osc_opts, split=scale ** (p / m), first_zero=oscillation.first_zero,
                                   check_divergence=check_divergence)

    if raw:
        if family == Family.LAPLACE:
            return integrate_decay(in_x, plain)
        return integrate_algebraic(in_x, plain, split=point)

    if family == Family.LAPLACE:
        return integrate_decay(reduced, plain)
    return integrate_algebraic(reduced, plain, split=scale)


def eval_transform(req: TransformRequest) -> QuadResult:
    """
    Evaluates the transform through its reduced Laplace/Stieltjes form.

    Example:
        >>> eval_transform(TransformRequest(TransformKind.parse("laplace"), parse("1"), point=2.0)).value
        0.5
    """
    f = compile_expr(req.f, req.params)
    return transform(req.kind, f, req.point, req.opts, oscillation_of(req.f, req.params))


def eval_transform_raw(req: TransformRequest) -> QuadResult:
    """Evaluates the defining integral directly; used to cross-check eval_transform."""
    f = compile_expr(req.f, req.params)
    return transform(req.kind, f, req.point, req.opts, oscillation_of(req.f, req.params), raw=True)


####################################################################################
# Nested transforms
####################################################################################

class _InnerLedger:
    """Collects evaluation counts and error levels of inner quadratures."""

    def __init__(self):
        self.evals = 0
        self.max_err = 0.0
        self.max_abs = 0.0

    def record(self, point: float, result: QuadResult) -> float:
        if result.status == Status.DIVERGENT_SUSPECTED or not math.isfinite(result.value):
            raise InnerQuadratureError(point, result)
        self.evals += result.evals
        self.max_err = max(self.max_err, result.err_est)
        self.max_abs = max(self.max_abs, abs(result.value))
        return result.value

    def relative_error(self) -> float:
        if self.max_abs == 0.0:
            return 0.0
        return self.max_err / self.max_abs


def split_budget(opts: QuadOptions):
    inner = replace(opts, rel_tol=opts.rel_tol * INNER_TOL_FACTOR, abs_tol=opts.abs_tol * INNER_TOL_FACTOR,
                    max_evals=max(INNER_MIN_EVALS, opts.max_evals // 100), strategy=Strategy.AUTO,
                    oscillation_period_hint=None)
    outer = replace(opts, max_evals=max(OUTER_MIN_EVALS, opts.max_evals // 250), strategy=Strategy.AUTO,
                    oscillation_period_hint=None)
    return inner, outer


def _combine(outer: QuadResult, ledger: _InnerLedger, opts: QuadOptions) -> QuadResult:
    err = outer.err_est + ledger.relative_error() * abs(outer.value)
    if outer.status == Status.DIVERGENT_SUSPECTED:
        status = Status.DIVERGENT_SUSPECTED
    elif err <= opts.tolerance(outer.value):
        status = Status.CONVERGED
    else:
        status = Status.MAX_EVALS
    return QuadResult(outer.value, err, outer.evals + ledger.evals, status, outer.strategy_used)


def iterate_transforms(outer: TransformKind, inner: TransformKind, f: Function, params: Optional[ParamMap] = None,
                       point: float = 1.0, inner_weight: Optional[Callable[[float], float]] = None,
                       inner_point: Optional[Callable[[float], float]] = None,
                       opts: Optional[QuadOptions] = None) -> QuadResult:
    """
    T_outer{ w(u) * T_inner{f; phi(u)}; point }.

    The outer quadrature runs over u; at each outer node the inner transform
    is evaluated at phi(u) (default u) with a tenth of the outer tolerance and
    multiplied by w(u) (default 1). Oscillatory inner integrals are summed in
    the averaged sense, so the nodes where the inner damping vanishes (u -> 0)
    still get the limiting value.

    Raises:
        InnerQuadratureError: If an inner transform diverges or is not finite.
    """
    opts = opts or QuadOptions()
    oscillation = None if callable(f) else oscillation_of(f, params)
    inner_f = _as_callable(f, params)
    inner_opts, outer_opts = split_budget(opts)
    ledger = _InnerLedger()

    def outer_integrand(u: np.ndarray) -> np.ndarray:
        out = np.zeros(u.shape, dtype=np.float64)
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            for i, ui in enumerate(u.tolist()):
                w = 1.0 if inner_weight is None else float(inner_weight(ui))
                at = ui if inner_point is None else float(inner_point(ui))
                if w == 0.0 or not math.isfinite(w) or not (0.0 < at < math.inf):
                    continue
                res = transform(inner, inner_f, at, inner_opts, oscillation, check_divergence=False)
                out[i] = w * ledger.record(ui, res)
        return out

    result = transform(outer, outer_integrand, point, outer_opts)
    return _combine(result, ledger, opts)


def iterate_l2n(f: Function, params: Optional[ParamMap], n: int, z: float,
                opts: Optional[QuadOptions] = None) -> QuadResult:
    """L_2n{L_2n{f; y}; z}, which equals P_2n{f; z} / (2n)."""
    kind = TransformKind(KindName.L2N, n)
    return iterate_transforms(kind, kind, f, params, z, opts=opts)


def transform_factor(kind: TransformKind, f: Function, params: Optional[ParamMap] = None,
                     opts: Optional[QuadOptions] = None) -> Callable[[float], QuadResult]:
    """Returns point -> T{f; point}, for use as an outer_integral factor."""
    opts = opts or QuadOptions()
    oscillation = None if callable(f) else oscillation_of(f, params)
    fc = _as_callable(f, params)

    def factor(point: float) -> QuadResult:
        return transform(kind, fc, point, opts, oscillation, check_divergence=False)

    return factor


def outer_integral(weight: Function, factors: Sequence[Callable[[float], QuadResult]],
                   params: Optional[ParamMap] = None, opts: Optional[QuadOptions] = None,
                   oscillation: Optional[DecayClass] = None) -> QuadResult:
    """
    Integral over (0, inf) of weight(x) * prod_k factor_k(x) dx, where every
    factor is an inner transform evaluated at the outer variable.

    The outer integral is oscillatory when `oscillation` is given (the weight
    carries a sine/cosine), decaying otherwise.
    """
    opts = opts or QuadOptions()
    w = _as_callable(weight, params)
    _, outer_opts = split_budget(opts)
    ledger = _InnerLedger()

    def outer_integrand(x: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            out = np.asarray(w(x), dtype=np.float64).copy()
            for i, xi in enumerate(x.tolist()):
                if out[i] == 0.0 or not math.isfinite(out[i]):
                    out[i] = 0.0
                    continue
                for factor in factors:
                    out[i] *= ledger.record(xi, factor(xi))
        return out

    if oscillation is not None:
        g = substitute_power(outer_integrand, oscillation.power)
        osc_opts = replace(outer_opts, oscillation_period_hint=oscillation.period)
        result = integrate_oscillatory(g, oscillation.period, osc_opts, first_zero=oscillation.first_zero)
    else:
        result = integrate_decay(outer_integrand, outer_opts)
    return _combine(result, ledger, opts)


@dataclass(frozen=True)
class ParsevalMembers:
    first: QuadResult
    second: QuadResult
    third: QuadResult

    def values(self) -> List[float]:
        return [self.first.value, self.second.value, self.third.value]


def scale_result(result: QuadResult, factor: float) -> QuadResult:
    return replace(result, value=result.value * factor, err_est=result.err_est * abs(factor))


def parseval_members(f: Expr, g: Expr, params: Optional[ParamMap], n: int,
                     opts: Optional[QuadOptions] = None) -> ParsevalMembers:
    """
    The three members of the L_2n / P_2n Parseval-Goldstein identities:

        first  = int y^(2n-1) L_2n{f; y} L_2n{g; y} dy
        second = (1/2n) int x^(2n-1) f(x) P_2n{g; x} dx
        third  = (1/2n) int u^(2n-1) g(u) P_2n{f; u} du

    Example:
        With f = g = exp(-x^2) and n = 1 all three equal 1/8.
    """
    opts = opts or QuadOptions()
    params = dict(params or {})
    l2n = TransformKind(KindName.L2N, n)
    p2n = TransformKind(KindName.P2N, n)
    inner_opts, _ = split_budget(opts)
    fc = compile_expr(f, params)
    gc = compile_expr(g, params)
    order = 2 * n

    def power_weight(x):
        return np.power(x, order - 1)

    first = outer_integral(power_weight, [transform_factor(l2n, f, params, inner_opts),
                                          transform_factor(l2n, g, params, inner_opts)], opts=opts)
    second = outer_integral(lambda x: power_weight(x) * fc(x), [transform_factor(p2n, g, params, inner_opts)],
                            opts=opts)
    third = outer_integral(lambda x: power_weight(x) * gc(x), [transform_factor(p2n, f, params, inner_opts)],
                           opts=opts)
    return ParsevalMembers(first, scale_result(second, 1.0 / order), scale_result(third, 1.0 / order))

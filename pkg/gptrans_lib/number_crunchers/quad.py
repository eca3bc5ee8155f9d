"""
Quadrature over (0, inf) for the transform integrals.

Integrands are vectorized callables: they receive a 1-D numpy array of
abscissae and return an array of the same length. Every strategy returns a
QuadResult; non-convergence is reported through `status`, never raised.

Strategies:
  DECAY        double-exponential map x = exp(t - exp(-t)) with halving
               trapezoid refinement. Works for any integrand that decays at
               least algebraically faster than 1/x.
  ALGEBRAIC    split at a scale point, tanh-sinh on [0, s], tail mapped by
               x = s/t onto (0, 1] (or summed by oscillatory cells when a
               period hint is present).
  OSCILLATORY  cells between consecutive zeros of the oscillating factor,
               summed with Euler/van Wijngaarden repeated averaging.
  ABEL         damped integrals with exp(-eps x) on a halving eps ladder,
               Richardson-extrapolated to eps = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional

import numpy as np

from .expr import DecayClass, DecayKind

Integrand = Callable[[np.ndarray], np.ndarray]


class Strategy(str, Enum):
    AUTO = "AUTO"
    DECAY = "DECAY"
    ALGEBRAIC = "ALGEBRAIC"
    OSCILLATORY = "OSCILLATORY"
    ABEL = "ABEL"


class Status(str, Enum):
    CONVERGED = "CONVERGED"
    MAX_EVALS = "MAX_EVALS"
    DIVERGENT_SUSPECTED = "DIVERGENT_SUSPECTED"


class InvalidQuadOptions(ValueError):
    pass


class UnclassifiedIntegrandError(ValueError):
    """AUTO dispatch was asked to integrate something the classifier could not place."""


@dataclass(frozen=True)
class QuadOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_evals: int = 2_000_000
    strategy: Strategy = Strategy.AUTO
    oscillation_period_hint: Optional[float] = None
    # Abel ladder: eps0, eps0/2, ..., eps0/2^(rungs-1)
    eps0: float = 0.25
    rungs: int = 8

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidQuadOptions(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise InvalidQuadOptions(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_evals < 1000:
            raise InvalidQuadOptions(f"max_evals must be at least 1000, got {self.max_evals}")
        if self.oscillation_period_hint is not None and not self.oscillation_period_hint > 0:
            raise InvalidQuadOptions("oscillation_period_hint must be positive")
        if self.strategy == Strategy.OSCILLATORY and self.oscillation_period_hint is None:
            raise InvalidQuadOptions("OSCILLATORY strategy requires oscillation_period_hint")
        if not self.eps0 > 0:
            raise InvalidQuadOptions("eps0 must be positive")
        if self.rungs < 2:
            raise InvalidQuadOptions("rungs must be at least 2")

    def tolerance(self, value: float) -> float:
        """Absolute error allowed for a result of the given magnitude."""
        return max(self.rel_tol * abs(value), self.abs_tol)


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_est: float
    evals: int
    status: Status
    strategy_used: Strategy

    @property
    def converged(self) -> bool:
        return self.status == Status.CONVERGED


class _CountingIntegrand:
    """Wraps an integrand, counts evaluations and zeroes non-finite values."""

    def __init__(self, f: Integrand):
        self.f = f
        self.evals = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.evals += x.size
        if x.size == 0:
            return np.zeros(0)
        with np.errstate(all="ignore"):
            y = np.asarray(self.f(x), dtype=np.float64)
        y = np.broadcast_to(y, x.shape).astype(np.float64, copy=True)
        y[~np.isfinite(y)] = 0.0
        return y


def _finish(value: float, err: float, evals: int, opts: QuadOptions, strategy: Strategy,
            divergent: bool = False) -> QuadResult:
    if divergent or not math.isfinite(value):
        status = Status.DIVERGENT_SUSPECTED
    elif err <= opts.tolerance(value):
        status = Status.CONVERGED
    else:
        status = Status.MAX_EVALS
    return QuadResult(value=float(value), err_est=float(err), evals=int(evals), status=status,
                      strategy_used=strategy)


def substitute_power(f: Integrand, p: float) -> Integrand:
    """
    Change of variable t = x^p on (0, inf).

    Returns g with integral_0^inf f(x) dx == integral_0^inf g(t) dt, where
    g(t) = f(t^(1/p)) * t^(1/p - 1) / p.
    """
    if not p > 0:
        raise ValueError("power must be positive")
    if p == 1:
        return f
    inv = 1.0 / p

    def g(t: np.ndarray) -> np.ndarray:
        return np.asarray(f(np.power(t, inv)), dtype=np.float64) * np.power(t, inv - 1.0) * inv

    return g


####################################################################################
# Finite interval: tanh-sinh
####################################################################################

TS_T_MAX = 4.0
TS_H0 = 0.5
TS_MAX_LEVEL = 10


def _tanh_sinh_contrib(fc: _CountingIntegrand, a: float, b: float, t: np.ndarray) -> np.ndarray:
    u = 0.5 * math.pi * np.sinh(t)
    q = np.exp(-2.0 * np.abs(u))
    d = (b - a) * q / (1.0 + q)
    x = np.where(t < 0, a + d, b - d)
    w = (b - a) * math.pi * np.cosh(t) * q / (1.0 + q) ** 2
    keep = (d > 0) & (x > a) & (x < b) & (w > 0)
    out = np.zeros_like(t)
    if np.any(keep):
        out[keep] = fc(x[keep]) * w[keep]
    return out


def _finite(f: Integrand, a: float, b: float, opts: QuadOptions, budget: int) -> QuadResult:
    fc = _CountingIntegrand(f)
    if not b > a:
        return QuadResult(0.0, 0.0, 0, Status.CONVERGED, Strategy.ALGEBRAIC)
    h = TS_H0
    t = np.arange(-TS_T_MAX, TS_T_MAX + 0.5 * h, h)
    if t.size > budget:
        return QuadResult(0.0, math.inf, 0, Status.MAX_EVALS, Strategy.ALGEBRAIC)
    total = h * float(np.sum(_tanh_sinh_contrib(fc, a, b, t)))
    err = math.inf
    for level in range(1, TS_MAX_LEVEL + 1):
        h_new = h / 2.0
        t_new = np.arange(-TS_T_MAX + h_new, TS_T_MAX, h)
        if fc.evals + t_new.size > budget:
            break
        refined = 0.5 * total + h_new * float(np.sum(_tanh_sinh_contrib(fc, a, b, t_new)))
        err = abs(refined - total)
        total, h = refined, h_new
        if not math.isfinite(total):
            break
        if level >= 3 and err <= opts.tolerance(total):
            break
    return _finish(total, err, fc.evals, opts, Strategy.ALGEBRAIC)


def integrate_finite(f: Integrand, a: float, b: float, opts: Optional[QuadOptions] = None) -> QuadResult:
    """
    Tanh-sinh quadrature of f over [a, b], refined by halving the step.

    Endpoint singularities that are integrable are absorbed by the map; nodes
    that round onto an endpoint are skipped.
    """
    opts = opts or QuadOptions()
    return _finite(f, float(a), float(b), opts, opts.max_evals)


####################################################################################
# Semi-infinite, decaying: exp-sinh type map
####################################################################################

DE_T_LOW = -6.5
DE_T_CAP = 40.0
DE_H0 = 0.5
DE_MAX_LEVEL = 12
_EPS = float(np.finfo(float).eps)


def _exp_sinh_contrib(fc: _CountingIntegrand, t: np.ndarray) -> np.ndarray:
    e = np.exp(-t)
    x = np.exp(t - e)
    dx = x * (1.0 + e)
    keep = (x > 0) & np.isfinite(x) & np.isfinite(dx)
    out = np.zeros_like(t)
    if np.any(keep):
        out[keep] = fc(x[keep]) * dx[keep]
    return out


def _decay(f: Integrand, opts: QuadOptions, budget: int) -> QuadResult:
    fc = _CountingIntegrand(f)
    h = DE_H0
    t0 = np.arange(DE_T_LOW, DE_T_CAP + 0.5 * h, h)
    if t0.size > budget:
        return QuadResult(0.0, math.inf, 0, Status.MAX_EVALS, Strategy.DECAY)
    w0 = _exp_sinh_contrib(fc, t0)
    peak = float(np.max(np.abs(w0)))
    if peak == 0.0:
        return _finish(0.0, 0.0, fc.evals, opts, Strategy.DECAY)

    significant = np.nonzero(np.abs(w0) > _EPS * peak)[0]
    last = int(significant[-1])
    t_hi = min(float(t0[last]) + 1.0, DE_T_CAP)

    # Tail beyond the cap, from the decay rate of the last two coarse nodes.
    tail = 0.0
    divergent = False
    if last >= t0.size - 2:
        w_end, w_prev = abs(w0[-1]), abs(w0[-3])
        if w_prev == 0 or w_end >= w_prev:
            divergent = True
            tail = w_end * DE_T_CAP
        else:
            rate = math.log(w_prev / w_end) / (2 * h)
            tail = w_end / rate
    head = abs(float(w0[0])) if abs(w0[0]) > _EPS * peak else 0.0

    in_window = t0 <= t_hi + 1e-12
    total = h * float(np.sum(w0[in_window]))
    err = math.inf
    for level in range(1, DE_MAX_LEVEL + 1):
        h_new = h / 2.0
        t_new = np.arange(DE_T_LOW + h_new, t_hi, h)
        if fc.evals + t_new.size > budget:
            break
        refined = 0.5 * total + h_new * float(np.sum(_exp_sinh_contrib(fc, t_new)))
        err = abs(refined - total)
        total, h = refined, h_new
        if not math.isfinite(total):
            divergent = True
            break
        if level >= 3 and err + tail + head <= opts.tolerance(total):
            break
    if divergent:
        return _finish(total, err + tail + head, fc.evals, opts, Strategy.DECAY, divergent=True)
    if tail > max(1e3 * opts.tolerance(total), 1e-6 * abs(total)):
        # integrand is not decaying fast enough for the map to reach it
        return _finish(total, err + tail + head, fc.evals, opts, Strategy.DECAY, divergent=True)
    return _finish(total, err + tail + head, fc.evals, opts, Strategy.DECAY)


def integrate_decay(f: Integrand, opts: Optional[QuadOptions] = None) -> QuadResult:
    """
    Double-exponential quadrature of a decaying integrand over (0, inf).

    The map x = exp(t - exp(-t)) sends (-inf, inf) onto (0, inf) with double
    exponential decay at the origin and single exponential growth of x at
    infinity, which turns exponential decay of f into double exponential decay
    of the transformed integrand. The upper end of the t window is found from a
    coarse scan; if the scan shows no decay by x ~ e^40, the result is flagged
    DIVERGENT_SUSPECTED.

    Example:
        >>> integrate_decay(lambda x: np.exp(-x)).value
        1.0000000000000002
    """
    opts = opts or QuadOptions()
    return _decay(f, opts, opts.max_evals)


####################################################################################
# Oscillatory: zero-to-zero cells + repeated averaging
####################################################################################

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
OSC_FIRST_BATCH = 64
OSC_BATCH = 64
OSC_MAX_CELLS = 4096
OSC_AVERAGING_DEPTH = 48
DIVERGENCE_RATIO = 0.95


def _gauss_cells(fc: _CountingIntegrand, lefts: np.ndarray, width: float) -> np.ndarray:
    half = 0.5 * width
    x = (lefts + half)[:, None] + half * GL_NODES[None, :]
    y = fc(x.ravel()).reshape(x.shape)
    return half * (y @ GL_WEIGHTS)


def _euler_average(partial_sums: np.ndarray):
    """Repeated averaging of trailing partial sums; returns (estimate, spread of the last rows)."""
    row = np.asarray(partial_sums, dtype=np.float64)
    history: List[np.ndarray] = [row]
    while row.size > 1:
        row = 0.5 * (row[:-1] + row[1:])
        history.append(row)
    estimate = float(row[0])
    spread = 0.0
    for tail_row in history[-3:]:
        spread = max(spread, float(np.max(np.abs(tail_row - estimate))))
    return estimate, spread


def _cells_not_decaying(cells: np.ndarray) -> bool:
    magnitudes = np.abs(cells)
    n = magnitudes.size
    if n < 16:
        return False
    early = float(np.mean(magnitudes[: n // 2]))
    late = float(np.mean(magnitudes[n - n // 4:]))
    if early == 0.0:
        return False
    return late / early >= DIVERGENCE_RATIO


def _oscillatory(f: Integrand, period: float, opts: QuadOptions, budget: int, start: float = 0.0,
                 first_zero: float = 0.0, check_divergence: bool = True) -> QuadResult:
    fc = _CountingIntegrand(f)
    half = 0.5 * period
    k = math.ceil((start - first_zero) / half)
    first_boundary = first_zero + k * half
    if first_boundary <= start + 1e-12 * max(1.0, abs(start)):
        first_boundary += half

    head = _finite(f, start, first_boundary, opts, budget // 4)
    used = head.evals
    cells = np.zeros(0)
    estimate = head.value
    previous = None
    err = math.inf
    target = OSC_FIRST_BATCH
    while True:
        count = target - cells.size
        if used + fc.evals + count * GL_NODES.size > budget:
            break
        lefts = first_boundary + half * np.arange(cells.size, target, dtype=np.float64)
        cells = np.concatenate([cells, _gauss_cells(fc, lefts, half)])
        partial = head.value + np.cumsum(cells)
        depth = min(OSC_AVERAGING_DEPTH, partial.size - partial.size // 3)
        estimate, spread = _euler_average(partial[-depth:])
        err = spread + head.err_est
        if previous is not None:
            err = max(err, abs(estimate - previous) + head.err_est)
            if err <= opts.tolerance(estimate):
                break
        previous = estimate
        if target >= OSC_MAX_CELLS:
            break
        target = min(target + OSC_BATCH, OSC_MAX_CELLS)

    divergent = head.status == Status.DIVERGENT_SUSPECTED
    if check_divergence and _cells_not_decaying(cells):
        divergent = True
    return _finish(estimate, err, used + fc.evals, opts, Strategy.OSCILLATORY, divergent=divergent)


def integrate_oscillatory(f: Integrand, period: float, opts: Optional[QuadOptions] = None,
                          start: float = 0.0, first_zero: float = 0.0,
                          check_divergence: bool = True) -> QuadResult:
    """
    Sums an oscillatory integral over cells between consecutive zeros.

    The oscillating factor has zeros at first_zero + k * period / 2 (0 for a
    sine, a quarter period for a cosine). The cell from `start` to the first
    zero is done by tanh-sinh, all later cells by 24-point Gauss-Legendre. The
    partial sums are accelerated by repeated averaging; the estimate is
    accepted when two consecutive batches agree. Cells whose magnitudes do not
    shrink mark the integral as DIVERGENT_SUSPECTED (e.g. sin(x) on (0, inf)).

    Parameters:
        f: Vectorized integrand.
        period: Full period of the oscillating factor.
        opts: Quadrature options.
        start: Lower integration limit.
        first_zero: Phase of the zero set.
        check_divergence: When false, the cell-magnitude test is skipped and the
            averaged sum is returned as the (Euler) value of the integral.

    Returns:
        QuadResult with strategy_used OSCILLATORY.
    """
    opts = opts or QuadOptions(oscillation_period_hint=period)
    if not period > 0:
        raise InvalidQuadOptions("period must be positive")
    return _oscillatory(f, float(period), opts, opts.max_evals, start=float(start),
                        first_zero=float(first_zero), check_divergence=check_divergence)


####################################################################################
# Algebraic tails: split + x = s/t
####################################################################################

def _algebraic(f: Integrand, opts: QuadOptions, budget: int, split: float, first_zero: float,
               check_divergence: bool = True) -> QuadResult:
    if not split > 0:
        raise ValueError("split point must be positive")
    head = _finite(f, 0.0, split, opts, budget // 2)
    if opts.oscillation_period_hint is not None:
        tail = _oscillatory(f, opts.oscillation_period_hint, opts, budget - head.evals, start=split,
                            first_zero=first_zero, check_divergence=check_divergence)
    else:
        def mapped(t: np.ndarray) -> np.ndarray:
            return np.asarray(f(split / t), dtype=np.float64) * split / (t * t)
        tail = _finite(mapped, 0.0, 1.0, opts, budget - head.evals)
    value = head.value + tail.value
    err = head.err_est + tail.err_est
    divergent = Status.DIVERGENT_SUSPECTED in (head.status, tail.status)
    return _finish(value, err, head.evals + tail.evals, opts, Strategy.ALGEBRAIC, divergent=divergent)


def integrate_algebraic(f: Integrand, opts: Optional[QuadOptions] = None, split: float = 1.0,
                        first_zero: float = 0.0, check_divergence: bool = True) -> QuadResult:
    """
    Integral over (0, inf) of an integrand with an algebraically decaying tail.

    [0, split] is integrated by tanh-sinh. The tail is mapped by x = split/t
    onto (0, 1], or, when `opts.oscillation_period_hint` is set, summed by
    oscillatory cells starting at the split point.

    Example:
        >>> integrate_algebraic(lambda x: x / (x * x + 1) ** 2).value
        0.5
    """
    opts = opts or QuadOptions()
    return _algebraic(f, opts, opts.max_evals, float(split), float(first_zero), check_divergence)


####################################################################################
# Abel regularization
####################################################################################

def _richardson(values: List[float]):
    """Extrapolates A(eps) sampled at eps0 / 2^j to eps = 0; returns (value, diagonal)."""
    table = [[v] for v in values]
    for j in range(1, len(values)):
        for k in range(1, j + 1):
            factor = 2.0 ** k - 1.0
            table[j].append(table[j][k - 1] + (table[j][k - 1] - table[j - 1][k - 1]) / factor)
    diagonal = [table[j][j] for j in range(len(values))]
    return diagonal[-1], diagonal


def _abel(f: Integrand, opts: QuadOptions, budget: int, first_zero: float, power: float = 1.0) -> QuadResult:
    # damping is always exp(-eps x); cells are summed in s = x^power
    period = opts.oscillation_period_hint
    rung_opts = opts
    values: List[float] = []
    errors: List[float] = []
    statuses: List[Status] = []
    evals = 0
    truncated = False
    for j in range(opts.rungs):
        eps = opts.eps0 / 2.0 ** j
        rung_budget = (budget - evals) // (opts.rungs - j)

        def damped(x: np.ndarray, eps=eps) -> np.ndarray:
            return np.asarray(f(x), dtype=np.float64) * np.exp(-eps * x)

        if period is not None:
            rung = _oscillatory(substitute_power(damped, power), period, rung_opts, rung_budget,
                                first_zero=first_zero, check_divergence=False)
        else:
            rung = _decay(damped, rung_opts, rung_budget)
        evals += rung.evals
        if not math.isfinite(rung.err_est):
            truncated = True
            break
        values.append(rung.value)
        errors.append(rung.err_est)
        statuses.append(rung.status)
        if j == 0:
            # later rungs share the absolute scale of the first
            rung_opts = replace(opts, abs_tol=max(opts.abs_tol, opts.rel_tol * abs(rung.value)))

    if len(values) < 2:
        status = Status.DIVERGENT_SUSPECTED if Status.DIVERGENT_SUSPECTED in statuses else Status.MAX_EVALS
        return QuadResult(values[-1] if values else 0.0, math.inf, evals, status, Strategy.ABEL)

    value, diagonal = _richardson(values)
    diffs = [abs(diagonal[k] - diagonal[k - 1]) for k in range(1, len(diagonal))]
    # noise floor: rung errors amplified by the extrapolation weights
    noise = 2.0 ** len(values) * max(errors) + opts.abs_tol
    err = diffs[-1] + noise
    non_monotone = any(diffs[k] > diffs[k - 1] and diffs[k] > noise for k in range(1, len(diffs)))
    if non_monotone or Status.DIVERGENT_SUSPECTED in statuses or not math.isfinite(value):
        status = Status.DIVERGENT_SUSPECTED
    elif truncated or any(s != Status.CONVERGED for s in statuses):
        status = Status.MAX_EVALS
    elif diffs[-1] <= max(opts.tolerance(value), noise):
        status = Status.CONVERGED
    else:
        status = Status.MAX_EVALS
    return QuadResult(float(value), float(err), evals, status, Strategy.ABEL)


def integrate_abel(f: Integrand, opts: Optional[QuadOptions] = None, first_zero: float = 0.0) -> QuadResult:
    """
    Abel-regularized value lim_{eps -> 0+} integral_0^inf f(x) exp(-eps x) dx.

    Each rung eps = eps0 / 2^j (j < rungs) is integrated with the oscillatory
    engine when a period hint is given, with the decay engine otherwise. The
    rung values are Richardson-extrapolated in eps; diagonal differences that
    grow above the noise floor mark the result DIVERGENT_SUSPECTED.

    The rungs share max_evals: each gets an equal part of what is left, and
    the ladder stops with MAX_EVALS once a rung cannot finish. The result is
    CONVERGED when every rung converged and the last diagonal difference is
    within the tolerance or within the rung noise floor (2^rungs times the
    largest rung error), so limits of zero converge as well.

    Example:
        >>> integrate_abel(np.cos, QuadOptions(oscillation_period_hint=2 * np.pi), first_zero=np.pi / 2).status
        <Status.CONVERGED: 'CONVERGED'>
    """
    opts = opts or QuadOptions()
    return _abel(f, opts, opts.max_evals, float(first_zero))


####################################################################################
# AUTO dispatch
####################################################################################

def integrate_auto(f: Integrand, hints: Optional[DecayClass], opts: Optional[QuadOptions] = None) -> QuadResult:
    """
    Integrates f over (0, inf) with the strategy named in opts, or chosen from
    the decay classification when opts.strategy is AUTO.

    Oscillatory classes carry the power p of the oscillating argument; the
    integrand is moved to t = x^p first so the zeros are evenly spaced. Under
    ABEL the damping factor stays exp(-eps x) and only the cells move to t.

    Raises:
        UnclassifiedIntegrandError: AUTO with no hints or a BOUNDED_UNKNOWN class.
    """
    opts = opts or QuadOptions()
    strategy = opts.strategy
    if strategy == Strategy.AUTO:
        if hints is None or hints.kind == DecayKind.BOUNDED_UNKNOWN:
            raise UnclassifiedIntegrandError(
                "integrand could not be classified; choose a strategy explicitly "
                "(DECAY, ALGEBRAIC, OSCILLATORY or ABEL)")
        strategy = {
            DecayKind.EXP_DECAY: Strategy.DECAY,
            DecayKind.ALGEBRAIC: Strategy.ALGEBRAIC,
            DecayKind.OSCILLATORY: Strategy.OSCILLATORY,
        }[hints.kind]

    oscillating = hints is not None and hints.kind == DecayKind.OSCILLATORY
    if strategy in (Strategy.OSCILLATORY, Strategy.ABEL) and oscillating:
        sub_opts = replace(opts, oscillation_period_hint=hints.period)
        if strategy == Strategy.OSCILLATORY:
            g = substitute_power(f, hints.power)
            return _oscillatory(g, hints.period, sub_opts, opts.max_evals, first_zero=hints.first_zero)
        return _abel(f, sub_opts, opts.max_evals, hints.first_zero, power=hints.power)

    if strategy == Strategy.DECAY:
        return _decay(f, opts, opts.max_evals)
    if strategy == Strategy.ALGEBRAIC:
        return _algebraic(f, opts, opts.max_evals, 1.0, 0.0)
    if strategy == Strategy.OSCILLATORY:
        return _oscillatory(f, opts.oscillation_period_hint, opts, opts.max_evals)
    return _abel(f, opts, opts.max_evals, 0.0)

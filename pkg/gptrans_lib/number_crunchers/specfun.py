"""
Special functions needed by the transform kernels and their closed forms.

The module is self-contained: every function is built from power series,
continued fractions or a Lanczos rational sum, and evaluates elementwise on
Python floats or numpy arrays. A float in gives a float out; an array in gives
an array of the same shape out.

Algorithms (see docs/special_functions.md for the coefficient tables):
  - erf / erfc: Kummer series for |x| < 1, continued fraction of the upper
    incomplete gamma function Gamma(1/2, x^2) beyond.
  - erfcx: exp(x^2) * erfc(x) below 1, the same continued fraction without
    the exp(-x^2) factor above 1, leading asymptotic term for huge x.
  - gamma / log_gamma: Lanczos sum (g = 6.0246800407767296, 13 terms).
  - besselj: power series below x = 12, Miller backward recurrence with a
    Neumann-sum normalization up to max(25, 2.5 v^2), Hankel asymptotic
    expansion beyond.
  - exp_e1: power series up to 1, continued fraction beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

SQRT_PI = math.sqrt(math.pi)
EULER_GAMMA = 0.57721566490153286060651209008240243
BESSEL_CROSSOVER = 12.0
HANKEL_MIN_ARGUMENT = 25.0
MILLER_EXTRA_TERMS = 20
MILLER_RESCALE = 1e250
ERFC_SERIES_LIMIT = 1.0

_EPS = float(np.finfo(float).eps)
_FPMIN = 1e-300
_ERFCX_ASYMPTOTIC = 1e8

LANCZOS_G = 6.024680040776729583740234375
# Highest power first, evaluated with np.polyval.
LANCZOS_NUM = np.array([
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
], dtype=np.float64)
LANCZOS_DENOM = np.array([
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
], dtype=np.float64)


class SpecfunDomainError(ValueError):
    """Argument outside the domain where the function is defined here."""


class SpecfunConvergenceError(ArithmeticError):
    """A series or continued fraction ran out of terms before converging."""


@dataclass(frozen=True)
class AccuracyBudget:
    """
    Convergence budget for series and continued fractions.

    Terms are accumulated until they fall below machine precision. If
    `max_terms` is reached first, the partial result is accepted only when the
    last correction is below `rel_tol` relative to the running value.
    """
    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol}")
        if self.max_terms < 10:
            raise ValueError(f"max_terms must be at least 10, got {self.max_terms}")


DEFAULT_BUDGET = AccuracyBudget()


def _as_float_array(x: ArrayLike) -> np.ndarray:
    return np.array(x, dtype=np.float64, copy=True, ndmin=0)


def _restore(result: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(result)
    return result


def _check_budget(correction: np.ndarray, total: np.ndarray, budget: AccuracyBudget, what: str) -> None:
    scale = np.maximum(np.abs(total), _FPMIN)
    if np.any(np.abs(correction) > budget.rel_tol * scale):
        raise SpecfunConvergenceError(f"{what}: no convergence within {budget.max_terms} terms")


####################################################################################
# Error functions
####################################################################################

def _erf_kummer(x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    # erf(x) = 2x/sqrt(pi) exp(-x^2) sum_k (2x^2)^k / (1*3*...*(2k+1)); all terms positive
    two_x2 = 2.0 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, budget.max_terms + 1):
        term = term * two_x2 / (2 * k + 1)
        total = total + term
        if np.all(term <= 0.5 * _EPS * total):
            break
    else:
        _check_budget(term, total, budget, "erf series")
    return 2.0 / SQRT_PI * x * np.exp(-x * x) * total


def _erfcx_continued_fraction(x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    # Gamma(1/2, z) continued fraction (modified Lentz), z = x^2, x >= 1.
    # erfc(x) = exp(-z) * x * h / sqrt(pi), hence erfcx(x) = x * h / sqrt(pi).
    z = x * x
    a = 0.5
    b = z + 1.0 - a
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    delta = np.ones_like(x)
    for i in range(1, budget.max_terms + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            break
    else:
        _check_budget(delta - 1.0, np.ones_like(x), budget, "erfc continued fraction")
    return x * h / SQRT_PI


def _erfcx_nonnegative(x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    out = np.empty_like(x)
    small = x < ERFC_SERIES_LIMIT
    huge = x >= _ERFCX_ASYMPTOTIC
    middle = ~small & ~huge
    if np.any(small):
        xs = x[small]
        out[small] = np.exp(xs * xs) * (1.0 - _erf_kummer(xs, budget))
    if np.any(middle):
        out[middle] = _erfcx_continued_fraction(x[middle], budget)
    if np.any(huge):
        out[huge] = 1.0 / (SQRT_PI * x[huge])
    return out


def _erfc_nonnegative(x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    out = np.empty_like(x)
    small = x < ERFC_SERIES_LIMIT
    if np.any(small):
        out[small] = 1.0 - _erf_kummer(x[small], budget)
    if np.any(~small):
        xl = x[~small]
        with np.errstate(under="ignore"):
            out[~small] = np.exp(-xl * xl) * _erfcx_nonnegative(xl, budget)
    return out


def erfc(x: ArrayLike, budget: Optional[AccuracyBudget] = None) -> ArrayLike:
    """
    Complementary error function erfc(x) = 2/sqrt(pi) * integral_x^inf exp(-u^2) du.

    Parameters:
      x (float | np.ndarray): Any finite real argument(s).
      budget (AccuracyBudget, optional): Series/continued-fraction budget.

    Returns:
      float | np.ndarray: Values in (0, 2), monotone decreasing in x.

    Example:
      >>> round(erfc(1.0), 11)
      0.15729920705
    """
    budget = budget or DEFAULT_BUDGET
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.full_like(flat, np.nan)
    finite = ~np.isnan(flat)
    neg = finite & (flat < 0)
    pos = finite & ~neg
    if np.any(pos):
        out[pos] = _erfc_nonnegative(flat[pos], budget)
    if np.any(neg):
        out[neg] = 2.0 - _erfc_nonnegative(-flat[neg], budget)
    return _restore(out.reshape(arr.shape), x)


def erf(x: ArrayLike, budget: Optional[AccuracyBudget] = None) -> ArrayLike:
    """Error function; series for |x| < 1 (no cancellation), 1 - erfc(x) otherwise."""
    budget = budget or DEFAULT_BUDGET
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = np.abs(flat) < ERFC_SERIES_LIMIT
    if np.any(small):
        out[small] = _erf_kummer(flat[small], budget)
    if np.any(~small):
        out[~small] = 1.0 - np.asarray(erfc(flat[~small], budget))
    return _restore(out.reshape(arr.shape), x)


def erfcx(x: ArrayLike, budget: Optional[AccuracyBudget] = None) -> ArrayLike:
    """
    Scaled complementary error function exp(x^2) * erfc(x).

    Above x = 1 the value comes straight from the continued fraction, so the
    product never overflows; for huge x the leading term 1/(sqrt(pi) x) is used.
    Negative arguments use erfcx(-x) = 2 exp(x^2) - erfcx(x) and overflow to inf
    below about -26.6.

    Example:
      >>> round(erfcx(1.0), 11)
      0.42758357615
    """
    budget = budget or DEFAULT_BUDGET
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.full_like(flat, np.nan)
    finite = ~np.isnan(flat)
    neg = finite & (flat < 0)
    pos = finite & ~neg
    if np.any(pos):
        out[pos] = _erfcx_nonnegative(flat[pos], budget)
    if np.any(neg):
        xn = flat[neg]
        with np.errstate(over="ignore"):
            out[neg] = 2.0 * np.exp(xn * xn) - _erfcx_nonnegative(-xn, budget)
    return _restore(out.reshape(arr.shape), x)


####################################################################################
# Gamma
####################################################################################

def _lanczos_ratio(x: np.ndarray) -> np.ndarray:
    return np.polyval(LANCZOS_NUM, x) / np.polyval(LANCZOS_DENOM, x)


def _gamma_upper(x: np.ndarray) -> np.ndarray:
    # x >= 0.5: Gamma(x) = ratio(x) * ((x + g - 1/2) / e)^(x - 1/2), power split in halves
    base = (x + LANCZOS_G - 0.5) / math.e
    with np.errstate(over="ignore"):
        half = np.power(base, 0.5 * (x - 0.5))
        return _lanczos_ratio(x) * half * half


def gamma(x: ArrayLike) -> ArrayLike:
    """
    Euler gamma function for positive arguments.

    Parameters:
      x (float | np.ndarray): Strictly positive argument(s).

    Returns:
      float | np.ndarray: Gamma(x); overflows to inf above about 171.6.

    Raises:
      SpecfunDomainError: If any argument is not strictly positive.

    Example:
      >>> gamma(5.0)
      24.000000000000004
    """
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    if np.any(~(flat > 0)):
        raise SpecfunDomainError("gamma is only defined here for x > 0")
    out = np.empty_like(flat)
    low = flat < 0.5
    if np.any(~low):
        out[~low] = _gamma_upper(flat[~low])
    if np.any(low):
        xl = flat[low]
        # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        out[low] = math.pi / (np.sin(math.pi * xl) * _gamma_upper(1.0 - xl))
    return _restore(out.reshape(arr.shape), x)


def log_gamma(x: ArrayLike) -> ArrayLike:
    """Natural logarithm of Gamma(x) for x > 0, without overflow for large x."""
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    if np.any(~(flat > 0)):
        raise SpecfunDomainError("log_gamma is only defined here for x > 0")
    out = np.empty_like(flat)
    low = flat < 0.5
    if np.any(~low):
        xu = flat[~low]
        zgh = xu + LANCZOS_G - 0.5
        out[~low] = np.log(_lanczos_ratio(xu)) + (xu - 0.5) * (np.log(zgh) - 1.0)
    if np.any(low):
        xl = flat[low]
        out[low] = np.log(math.pi / np.sin(math.pi * xl)) - np.asarray(log_gamma(1.0 - xl))
    return _restore(out.reshape(arr.shape), x)


####################################################################################
# Bessel J
####################################################################################

def _besselj_series(v: np.ndarray, x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    half = 0.5 * x
    with np.errstate(divide="ignore"):
        log_lead = v * np.log(half) - np.asarray(log_gamma(v + 1.0))
    term = np.exp(log_lead)
    term = np.where(half == 0.0, np.where(v == 0.0, 1.0, np.where(v > 0, 0.0, np.inf)), term)
    total = term.copy()
    q = -half * half
    for k in range(1, budget.max_terms + 1):
        term = term * q / (k * (k + v))
        total = total + term
        if np.all(np.abs(term) <= 0.5 * _EPS * np.maximum(np.abs(total), _FPMIN)):
            break
    else:
        _check_budget(term, total, budget, "Bessel J series")
    return total


def _besselj_asymptotic(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Hankel expansion, summed until the terms stop decreasing
    mu = 4.0 * v * v
    term = np.ones_like(x)
    p_sum = np.ones_like(x)
    q_sum = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    last = np.abs(term)
    for k in range(1, 80):
        nxt = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        grows = np.abs(nxt) >= last
        active &= ~grows
        if not np.any(active):
            break
        term = np.where(active, nxt, term)
        sign = -1.0 if (k // 2) % 2 else 1.0
        contribution = np.where(active, sign * nxt, 0.0)
        if k % 2:
            q_sum = q_sum + contribution
        else:
            p_sum = p_sum + contribution
        last = np.where(active, np.abs(nxt), last)
        if np.all(~active | (np.abs(nxt) <= 0.5 * _EPS)):
            break
    omega = x - (0.5 * v + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p_sum * np.cos(omega) - q_sum * np.sin(omega))


def _besselj_miller(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Backward recurrence on J_{mu+k}, mu = v - m, normalized by the Neumann sum
    # (x/2)^mu = sum_j (mu + 2j) Gamma(mu + j) / j! J_{mu+2j}(x).
    m = np.where(v >= 0, np.floor(v), 0.0)
    mu = v - m
    m_int = m.astype(np.int64)
    top = float(np.max(np.maximum(x, m)))
    kmax = int(top + MILLER_EXTRA_TERMS + 10.0 * math.sqrt(top))
    kmax += kmax % 2
    j = kmax // 2
    a = np.exp(np.asarray(log_gamma(mu + j)) - float(log_gamma(j + 1.0)))
    f_next = np.zeros_like(x)
    f = np.full_like(x, 1e-30)
    target = np.zeros_like(x)
    norm = np.zeros_like(x)
    for k in range(kmax, 0, -1):
        if k % 2 == 0:
            j = k // 2
            norm = norm + (mu + k) * a * f
            if j >= 2:
                a = a * j / (mu + j - 1.0)
        target = np.where(m_int == k, f, target)
        f, f_next = (2.0 * (mu + k) / x) * f - f_next, f
        big = np.abs(f) > MILLER_RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / MILLER_RESCALE, 1.0)
            f, f_next, norm, target = f * scale, f_next * scale, norm * scale, target * scale
    # a is now Gamma(mu + 1)
    target = np.where(m_int == 0, f, target)
    norm = norm + a * f
    return target * np.power(0.5 * x, mu) / norm


def _hankel_threshold(v: np.ndarray) -> np.ndarray:
    # the expansion needs x well beyond v^2 / 2
    return np.maximum(HANKEL_MIN_ARGUMENT, 2.5 * np.square(v))


def besselj(v: ArrayLike, x: ArrayLike, budget: Optional[AccuracyBudget] = None) -> ArrayLike:
    """
    Bessel function of the first kind J_v(x) for real order v >= -1/2 and x >= 0.

    Parameters:
      v (float | np.ndarray): Order, broadcast against x.
      x (float | np.ndarray): Non-negative argument.
      budget (AccuracyBudget, optional): Budget for the power series.

    Returns:
      float | np.ndarray: J_v(x). The power series is used for x < 12, Miller
      backward recurrence from 12 up to max(25, 2.5 v^2) and the Hankel
      asymptotic expansion beyond.

    Raises:
      SpecfunDomainError: For v < -1/2 or x < 0.
      SpecfunConvergenceError: If the power series exhausts the budget.

    Example:
      >>> besselj(0.0, 0.0)
      1.0
    """
    budget = budget or DEFAULT_BUDGET
    v_arr, x_arr = np.broadcast_arrays(_as_float_array(v), _as_float_array(x))
    v_flat = np.atleast_1d(v_arr).astype(np.float64).ravel()
    x_flat = np.atleast_1d(x_arr).astype(np.float64).ravel()
    if np.any(v_flat < -0.5):
        raise SpecfunDomainError("besselj order must be >= -1/2")
    if np.any(x_flat < 0):
        raise SpecfunDomainError("besselj argument must be >= 0")
    out = np.empty_like(x_flat)
    near = x_flat < BESSEL_CROSSOVER
    far = ~near & (x_flat >= _hankel_threshold(v_flat))
    middle = ~near & ~far
    if np.any(near):
        out[near] = _besselj_series(v_flat[near], x_flat[near], budget)
    if np.any(middle):
        out[middle] = _besselj_miller(v_flat[middle], x_flat[middle])
    if np.any(far):
        out[far] = _besselj_asymptotic(v_flat[far], x_flat[far])
    result = out.reshape(np.shape(v_arr))
    if np.ndim(v) == 0 and np.ndim(x) == 0:
        return float(result)
    return result


####################################################################################
# Exponential integral
####################################################################################

def _e1_series(x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    power = np.ones_like(x)
    total = np.zeros_like(x)
    for k in range(1, budget.max_terms + 1):
        power = power * (-x) / k
        term = power / k
        total = total + term
        if np.all(np.abs(term) <= 0.5 * _EPS * np.maximum(np.abs(total), _FPMIN)):
            break
    else:
        _check_budget(term, total, budget, "E1 series")
    return -EULER_GAMMA - np.log(x) - total


def _e1_continued_fraction(x: np.ndarray, budget: AccuracyBudget) -> np.ndarray:
    b = x + 1.0
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    delta = np.ones_like(x)
    for i in range(1, budget.max_terms + 1):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            break
    else:
        _check_budget(delta - 1.0, np.ones_like(x), budget, "E1 continued fraction")
    with np.errstate(under="ignore"):
        return h * np.exp(-x)


def exp_e1(x: ArrayLike, budget: Optional[AccuracyBudget] = None) -> ArrayLike:
    """
    Exponential integral E1(x) = integral_x^inf exp(-t)/t dt for x > 0.

    Raises:
      SpecfunDomainError: If any argument is <= 0.

    Example:
      >>> round(exp_e1(1.0), 11)
      0.2193839344
    """
    budget = budget or DEFAULT_BUDGET
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    if np.any(~(flat > 0)):
        raise SpecfunDomainError("exp_e1 is only defined for x > 0")
    out = np.empty_like(flat)
    small = flat <= 1.0
    if np.any(small):
        out[small] = _e1_series(flat[small], budget)
    if np.any(~small):
        out[~small] = _e1_continued_fraction(flat[~small], budget)
    return _restore(out.reshape(arr.shape), x)

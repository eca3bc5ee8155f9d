import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats
from scipy import special

from gptrans_lib.number_crunchers import specfun
from gptrans_lib.number_crunchers.specfun import AccuracyBudget, SpecfunConvergenceError, SpecfunDomainError


@pytest.mark.parametrize("fn, x, expected", [
    (specfun.erfc, 1.0, 0.15729920705),
    (specfun.erfcx, 1.0, 0.42758357615),
    (specfun.exp_e1, 1.0, 0.21938393439),
    (lambda x: specfun.besselj(0.0, x), 1.0, 0.7651976866),
])
def test_reference_values(fn, x, expected):
    assert fn(x) == pytest.approx(expected, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(floats(min_value=-6.0, max_value=26.0))
def test_erfc_matches_scipy(x):
    assert specfun.erfc(x) == pytest.approx(special.erfc(x), rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(floats(min_value=-5.0, max_value=5.0))
def test_erf_matches_scipy(x):
    assert specfun.erf(x) == pytest.approx(special.erf(x), rel=1e-12, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(floats(min_value=-5.0, max_value=1e6))
def test_erfcx_matches_scipy(x):
    assert specfun.erfcx(x) == pytest.approx(special.erfcx(x), rel=1e-11)


def test_erfcx_huge_argument_uses_leading_term():
    x = 1e9
    assert specfun.erfcx(x) == pytest.approx(1.0 / (math.sqrt(math.pi) * x), rel=1e-12)


def test_erfcx_overflows_for_very_negative_argument():
    with np.errstate(over="ignore"):
        assert specfun.erfcx(-30.0) == math.inf


def test_erfc_is_vectorized_and_keeps_shape():
    x = np.linspace(-2.0, 4.0, 12).reshape(3, 4)
    out = specfun.erfc(x)
    assert out.shape == (3, 4)
    np.testing.assert_allclose(out, special.erfc(x), rtol=1e-12)


@settings(max_examples=150, deadline=None)
@given(floats(min_value=1e-3, max_value=170.0))
def test_gamma_matches_scipy(x):
    assert specfun.gamma(x) == pytest.approx(special.gamma(x), rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(floats(min_value=1e-3, max_value=1e6))
def test_log_gamma_matches_scipy(x):
    assert specfun.log_gamma(x) == pytest.approx(special.gammaln(x), rel=1e-12, abs=1e-13)


def test_gamma_half_is_sqrt_pi():
    assert specfun.gamma(0.5) == pytest.approx(specfun.SQRT_PI, rel=1e-14)


@pytest.mark.parametrize("fn", [specfun.gamma, specfun.log_gamma, specfun.exp_e1])
@pytest.mark.parametrize("bad", [0.0, -1.5])
def test_positive_only_functions_reject_domain(fn, bad):
    with pytest.raises(SpecfunDomainError):
        fn(bad)


@pytest.mark.parametrize("v", [0.0, 0.5, 1.0, 2.5])
@pytest.mark.parametrize("x", [0.0, 0.3, 2.0, 7.5, 15.0, 40.0])
def test_besselj_matches_scipy(v, x):
    assert specfun.besselj(v, x) == pytest.approx(special.jv(v, x), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("v", [0.0, 1.0, 2.5, 5.0])
def test_besselj_branches_agree_around_crossover(v):
    x = np.linspace(10.0, 14.0, 41)
    np.testing.assert_allclose(specfun.besselj(v, x), special.jv(v, x), atol=1e-9)


@pytest.mark.parametrize("v", [3.0, 5.0, 8.0, 12.5, 20.0])
@pytest.mark.parametrize("x", [12.0, 18.0, 30.0, 60.0, 100.0])
def test_besselj_high_orders_past_the_crossover(v, x):
    assert specfun.besselj(v, x) == pytest.approx(special.jv(v, x), rel=1e-10, abs=1e-12)


def test_besselj_fifth_order_at_the_crossover():
    value = specfun.besselj(5.0, 12.0)
    assert value == pytest.approx(-0.0734710, abs=1e-7)
    assert value == pytest.approx(special.jv(5.0, 12.0), rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(floats(min_value=0.5, max_value=5.0), floats(min_value=0.1, max_value=20.0))
def test_besselj_three_term_recurrence(v, x):
    below, at, above = specfun.besselj(np.array([v - 1.0, v, v + 1.0]), x)
    scale = abs(below) + abs(above) + abs(2.0 * v / x * at)
    assert abs(below + above - 2.0 * v / x * at) <= 1e-9 * scale


def _bessel_series_40(v, x):
    return sum((-1) ** k * (0.5 * x) ** (2 * k + v) / (math.factorial(k) * math.gamma(k + v + 1.0))
               for k in range(40))


@settings(max_examples=150, deadline=None)
@given(floats(min_value=0.0, max_value=5.0), floats(min_value=0.01, max_value=5.0))
def test_besselj_matches_plain_series(v, x):
    assert specfun.besselj(v, x) == pytest.approx(_bessel_series_40(v, x), rel=1e-11, abs=1e-14)


def test_besselj_series_reports_an_exhausted_budget():
    with pytest.raises(SpecfunConvergenceError):
        specfun.besselj(0.0, 11.0, budget=AccuracyBudget(max_terms=10))


def test_besselj_domain():
    with pytest.raises(SpecfunDomainError):
        specfun.besselj(-1.0, 1.0)
    with pytest.raises(SpecfunDomainError):
        specfun.besselj(0.0, -1.0)


@settings(max_examples=150, deadline=None)
@given(floats(min_value=1e-4, max_value=600.0))
def test_exp_e1_matches_scipy(x):
    assert specfun.exp_e1(x) == pytest.approx(special.exp1(x), rel=1e-11, abs=1e-300)


def test_accuracy_budget_validation():
    with pytest.raises(ValueError):
        AccuracyBudget(rel_tol=0.5)
    with pytest.raises(ValueError):
        AccuracyBudget(max_terms=3)


def test_scalar_in_scalar_out():
    assert isinstance(specfun.erfc(0.5), float)
    assert isinstance(specfun.besselj(1.0, 0.5), float)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats
from scipy import integrate

from gptrans_lib.number_crunchers.expr import DecayClass, DecayKind, UNKNOWN, classify_decay, compile_expr, parse
from gptrans_lib.number_crunchers.quad import (
    InvalidQuadOptions,
    QuadOptions,
    Status,
    Strategy,
    UnclassifiedIntegrandError,
    integrate_abel,
    integrate_algebraic,
    integrate_auto,
    integrate_decay,
    integrate_finite,
    integrate_oscillatory,
    substitute_power,
)

TWO_PI = 2.0 * math.pi


def test_finite_polynomial():
    res = integrate_finite(lambda x: x * x, 0.0, 1.0)
    assert res.converged
    assert res.value == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_finite_absorbs_endpoint_singularity():
    res = integrate_finite(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0)
    assert res.value == pytest.approx(2.0, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(floats(min_value=0.1, max_value=10.0))
def test_decay_exponential(a):
    res = integrate_decay(lambda x: np.exp(-a * x))
    assert res.status == Status.CONVERGED
    assert res.strategy_used == Strategy.DECAY
    assert res.value == pytest.approx(1.0 / a, rel=1e-9)


def test_decay_gaussian_counts_evaluations():
    res = integrate_decay(lambda x: np.exp(-x * x))
    assert res.value == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-10)
    assert 0 < res.evals <= QuadOptions().max_evals


def test_algebraic_rational():
    res = integrate_algebraic(lambda x: x / (x * x + 1.0) ** 2)
    assert res.converged
    assert res.value == pytest.approx(0.5, rel=1e-10)


@pytest.mark.parametrize("split", [0.25, 1.0, 4.0])
def test_algebraic_split_point_does_not_change_value(split):
    res = integrate_algebraic(lambda x: 1.0 / (1.0 + x * x), split=split)
    assert res.value == pytest.approx(math.pi / 2.0, rel=1e-10)


def test_oscillatory_sine_integral():
    res = integrate_oscillatory(lambda x: np.sin(x) / x, TWO_PI)
    assert res.converged
    assert res.strategy_used == Strategy.OSCILLATORY
    assert res.value == pytest.approx(math.pi / 2.0, rel=1e-8)


def test_oscillatory_cosine_phase():
    # int_0^inf cos(x) / (1 + x^2) dx = pi / (2e)
    res = integrate_oscillatory(lambda x: np.cos(x) / (1.0 + x * x), TWO_PI, first_zero=math.pi / 2.0)
    assert res.value == pytest.approx(math.pi / (2.0 * math.e), rel=1e-8)


def test_oscillatory_flags_non_decaying_cells():
    res = integrate_oscillatory(np.sin, TWO_PI)
    assert res.status == Status.DIVERGENT_SUSPECTED


def test_abel_value_of_sine():
    opts = QuadOptions(oscillation_period_hint=TWO_PI)
    res = integrate_abel(np.sin, opts)
    assert res.strategy_used == Strategy.ABEL
    assert res.value == pytest.approx(1.0, abs=1e-6)


def test_abel_value_of_cosine_is_zero():
    opts = QuadOptions(oscillation_period_hint=TWO_PI)
    res = integrate_abel(np.cos, opts, first_zero=math.pi / 2.0)
    assert res.status == Status.CONVERGED
    assert abs(res.value) <= 1e-8
    assert res.evals <= opts.max_evals


def test_abel_is_exact_on_absolutely_convergent_integrals():
    res = integrate_abel(lambda x: np.exp(-x))
    assert res.status == Status.CONVERGED
    assert res.value == pytest.approx(1.0, rel=1e-9)


def _damped_sin_squared(eps):
    # int_0^inf sin(x^2) exp(-eps x) dx, moved to s = x^2
    def envelope(s):
        return math.exp(-eps * math.sqrt(s)) / (2.0 * math.sqrt(s))

    head, _ = integrate.quad(lambda s: math.sin(s) * envelope(s), 0.0, TWO_PI, limit=200)
    tail, _ = integrate.quad(envelope, TWO_PI, math.inf, weight="sin", wvar=1.0)
    return head + tail


def test_abel_damps_in_x_when_the_oscillation_is_in_a_power_of_x():
    e = parse("sin(x^2)")
    opts = QuadOptions(strategy=Strategy.ABEL, eps0=1.0, rungs=2)
    res = integrate_auto(compile_expr(e), classify_decay(e), opts)
    # two rungs: Richardson gives 2 A(1/2) - A(1)
    damped_in_x = 2.0 * _damped_sin_squared(0.5) - _damped_sin_squared(1.0)

    def damped_in_t(eps):
        return math.sqrt(math.pi) / 2.0 * math.sin(0.5 * math.atan(1.0 / eps)) / (1.0 + eps * eps) ** 0.25

    assert res.value == pytest.approx(damped_in_x, rel=1e-6)
    assert res.value != pytest.approx(2.0 * damped_in_t(0.5) - damped_in_t(1.0), rel=1e-3)


def test_abel_of_a_power_oscillation_keeps_the_ordinary_value():
    e = parse("sin(x^2)")
    res = integrate_auto(compile_expr(e), classify_decay(e), QuadOptions(strategy=Strategy.ABEL))
    assert res.value == pytest.approx(math.sqrt(math.pi / 8.0), rel=1e-6)


CAPPED_RUNS = {
    "finite": lambda o: integrate_finite(lambda x: np.abs(np.sin(50.0 * x)), 0.0, 10.0, o),
    "decay": lambda o: integrate_decay(lambda x: np.exp(-0.01 * x) * np.sin(x) ** 2, o),
    "algebraic": lambda o: integrate_algebraic(lambda x: 1.0 / (1.0 + x) ** 1.5, o),
    "oscillatory": lambda o: integrate_oscillatory(lambda x: np.sin(x) / x, TWO_PI,
                                                   QuadOptions(max_evals=o.max_evals, oscillation_period_hint=TWO_PI)),
    "abel-cosine": lambda o: integrate_abel(np.cos, QuadOptions(max_evals=o.max_evals,
                                                                oscillation_period_hint=TWO_PI),
                                            first_zero=math.pi / 2.0),
    "abel-decay": lambda o: integrate_abel(lambda x: 1.0 / (1.0 + x) ** 3, o),
    "auto-abel": lambda o: integrate_auto(np.cos, classify_decay(parse("cos(x)")),
                                          QuadOptions(max_evals=o.max_evals, strategy=Strategy.ABEL)),
}


@pytest.mark.parametrize("max_evals", [1000, 1500, 3000])
@pytest.mark.parametrize("name", sorted(CAPPED_RUNS))
def test_every_strategy_respects_the_evaluation_cap(name, max_evals):
    res = CAPPED_RUNS[name](QuadOptions(max_evals=max_evals))
    assert 0 <= res.evals <= max_evals


@pytest.mark.parametrize("max_evals", [1000, 1500, 3000])
def test_abel_ladder_stops_when_the_budget_runs_out(max_evals):
    opts = QuadOptions(max_evals=max_evals, oscillation_period_hint=TWO_PI)
    res = integrate_abel(np.cos, opts, first_zero=math.pi / 2.0)
    assert res.status == Status.MAX_EVALS
    assert res.evals <= max_evals


def test_substitute_power_preserves_integral():
    g = substitute_power(lambda x: np.exp(-x), 2.0)
    assert integrate_decay(g).value == pytest.approx(1.0, rel=1e-10)


def test_auto_dispatch_from_classification():
    e = parse("exp(-x^2)")
    res = integrate_auto(compile_expr(e), classify_decay(e))
    assert res.strategy_used == Strategy.DECAY
    assert res.value == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-10)

    e = parse("1/(1+x^2)")
    res = integrate_auto(compile_expr(e), classify_decay(e))
    assert res.strategy_used == Strategy.ALGEBRAIC
    assert res.value == pytest.approx(math.pi / 2.0, rel=1e-10)


def test_auto_substitutes_oscillation_power():
    # int_0^inf sin(x^2) dx = sqrt(pi/8)
    e = parse("sin(x^2)")
    hints = classify_decay(e)
    assert hints.kind == DecayKind.OSCILLATORY
    res = integrate_auto(compile_expr(e), hints)
    assert res.value == pytest.approx(math.sqrt(math.pi / 8.0), rel=1e-7)


def test_auto_refuses_unclassified_integrands():
    with pytest.raises(UnclassifiedIntegrandError):
        integrate_auto(lambda x: np.exp(-x), UNKNOWN)
    with pytest.raises(UnclassifiedIntegrandError):
        integrate_auto(lambda x: np.exp(-x), None)


def test_explicit_strategy_overrides_unknown_class():
    opts = QuadOptions(strategy=Strategy.DECAY)
    res = integrate_auto(lambda x: np.exp(-x), UNKNOWN, opts)
    assert res.value == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("kwargs", [
    dict(rel_tol=0.0),
    dict(abs_tol=-1.0),
    dict(max_evals=999),
    dict(strategy=Strategy.OSCILLATORY),
    dict(oscillation_period_hint=-1.0),
    dict(eps0=0.0),
    dict(rungs=1),
])
def test_invalid_options(kwargs):
    with pytest.raises(InvalidQuadOptions):
        QuadOptions(**kwargs)


def test_tolerance_has_absolute_floor():
    opts = QuadOptions(rel_tol=1e-8, abs_tol=1e-12)
    assert opts.tolerance(0.0) == 1e-12
    assert opts.tolerance(10.0) == pytest.approx(1e-7)


def test_decay_class_requires_period_for_oscillation():
    with pytest.raises(ValueError):
        DecayClass(DecayKind.OSCILLATORY)

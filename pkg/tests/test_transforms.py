import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats, sampled_from
from scipy import integrate, special

from gptrans_lib.number_crunchers.expr import parse
from gptrans_lib.number_crunchers.quad import QuadOptions, Status, Strategy
from gptrans_lib.number_crunchers.transforms import (
    Family,
    InvalidTransformError,
    KindName,
    TransformKind,
    TransformRequest,
    canonical_form,
    eval_transform,
    eval_transform_raw,
    iterate_l2n,
    kernel_weight,
    parseval_members,
    split_budget,
    transform,
)

HALF_E_E1 = 0.5 * math.e * special.exp1(1.0)


def _eval(kind: str, f: str, point: float, n: int = 1, params=None) -> float:
    req = TransformRequest(TransformKind.parse(kind, n), parse(f), params or {}, point)
    res = eval_transform(req)
    assert res.converged, res
    return res.value


@pytest.mark.parametrize("name, n, power, family", [
    ("laplace", 1, 1, Family.LAPLACE),
    ("l2", 1, 2, Family.LAPLACE),
    ("ln", 4, 4, Family.LAPLACE),
    ("l2n", 3, 6, Family.LAPLACE),
    ("stieltjes", 1, 1, Family.STIELTJES),
    ("widder", 1, 2, Family.STIELTJES),
    ("pn", 2, 2, Family.STIELTJES),
    ("p2n", 3, 6, Family.STIELTJES),
])
def test_kind_power_and_family(name, n, power, family):
    kind = TransformKind.parse(name, n)
    assert kind.power == power
    assert kind.family == family
    form = canonical_form(kind)
    assert form.power == power
    assert form.coefficient == pytest.approx(1.0 / power)


def test_kind_parse_is_case_insensitive_and_ignores_n_for_classical_kinds():
    kind = TransformKind.parse(" Widder ", 7)
    assert kind.name == KindName.WIDDER
    assert kind.n == 1
    assert str(TransformKind.parse("p2n", 2)) == "p2n(n=2)"


@pytest.mark.parametrize("name, n", [("ln", 3), ("pn", 6), ("l2n", 0), ("p2n", 1.5), ("hankel", 1)])
def test_invalid_kinds(name, n):
    with pytest.raises(InvalidTransformError):
        TransformKind.parse(name, n)


@pytest.mark.parametrize("point", [0.0, -1.0, math.inf, math.nan])
def test_request_rejects_non_positive_points(point):
    with pytest.raises(InvalidTransformError):
        TransformRequest(TransformKind.parse("laplace"), parse("1"), point=point)


def test_kernel_weight_matches_definition():
    x = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(kernel_weight(TransformKind.parse("l2n", 2), x, 1.5),
                               x ** 3 * np.exp(-(1.5 * x) ** 4))
    np.testing.assert_allclose(kernel_weight(TransformKind.parse("p2n", 1), x, 1.5),
                               x / (x ** 2 + 1.5 ** 2))


def test_laplace_of_one():
    assert _eval("laplace", "1", 2.0) == pytest.approx(0.5, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(floats(min_value=0.1, max_value=10.0))
def test_laplace_of_exponential(y):
    assert _eval("laplace", "exp(-x)", y) == pytest.approx(1.0 / (1.0 + y), rel=1e-9)


def test_stieltjes_of_exponential():
    assert _eval("stieltjes", "exp(-x)", 1.0) == pytest.approx(math.e * special.exp1(1.0), rel=1e-9)


def test_widder_of_gaussian():
    assert _eval("widder", "exp(-x^2)", 1.0) == pytest.approx(HALF_E_E1, rel=1e-9)
    assert _eval("p2n", "exp(-x^2)", 1.0, n=1) == pytest.approx(HALF_E_E1, rel=1e-9)


def test_l2_of_sine_uses_oscillatory_cells():
    expected = math.sqrt(math.pi) / 4.0 * math.exp(-0.25)
    assert _eval("l2", "sin(x)", 1.0) == pytest.approx(expected, rel=1e-8)


def test_p2n_of_sine():
    assert _eval("p2n", "sin(x)", 1.0, n=1) == pytest.approx(math.pi / 2.0 * math.exp(-1.0), rel=1e-8)


def test_parameters_flow_into_the_integrand():
    assert _eval("laplace", "exp(-a*x)", 1.0, params={"a": 3.0}) == pytest.approx(0.25, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(sampled_from([("ln", 4), ("l2n", 2), ("pn", 2), ("p2n", 2), ("widder", 1)]),
       sampled_from(["exp(-x)", "exp(-x^2)", "1/(1+x^2)^2"]),
       floats(min_value=0.5, max_value=2.0))
def test_reduced_and_raw_forms_agree(kind_n, f, y):
    name, n = kind_n
    req = TransformRequest(TransformKind.parse(name, n), parse(f), {}, y)
    reduced, raw = eval_transform(req), eval_transform_raw(req)
    assert reduced.value == pytest.approx(raw.value, rel=1e-8)


@pytest.mark.parametrize("name, n, expected, raw_strategy, reduced_strategy", [
    ("l2n", 1, math.sqrt(math.pi) / 4.0 * math.exp(-0.25), Strategy.DECAY, Strategy.OSCILLATORY),
    ("p2n", 1, math.pi / 2.0 * math.exp(-1.0), Strategy.OSCILLATORY, Strategy.ALGEBRAIC),
    ("p2n", 2, 0.5888174148696468, Strategy.OSCILLATORY, Strategy.ALGEBRAIC),
])
def test_raw_and_reduced_forms_of_sine_are_independent(name, n, expected, raw_strategy, reduced_strategy):
    req = TransformRequest(TransformKind.parse(name, n), parse("sin(x)"), {}, 1.0)
    reduced, raw = eval_transform(req), eval_transform_raw(req)
    assert reduced.converged and raw.converged
    assert (raw.strategy_used, reduced.strategy_used) == (raw_strategy, reduced_strategy)
    assert raw.evals != reduced.evals
    assert raw.value == pytest.approx(expected, rel=1e-8)
    assert reduced.value == pytest.approx(expected, rel=1e-8)


def test_raw_form_against_scipy_oracle():
    kind = TransformKind.parse("ln", 2)
    req = TransformRequest(kind, parse("exp(-x)"), {}, 1.5)
    oracle, _ = integrate.quad(lambda x: x * math.exp(-(1.5 * x) ** 2) * math.exp(-x), 0, math.inf)
    assert eval_transform_raw(req).value == pytest.approx(oracle, rel=1e-8)


def test_transform_accepts_callables():
    res = transform(TransformKind.parse("laplace"), lambda x: np.exp(-x), 1.0)
    assert res.strategy_used == Strategy.DECAY
    assert res.value == pytest.approx(0.5, rel=1e-10)


def test_split_budget_tightens_inner_tolerance():
    opts = QuadOptions(rel_tol=1e-8, abs_tol=1e-12, max_evals=2_000_000)
    inner, outer = split_budget(opts)
    assert inner.rel_tol == pytest.approx(1e-9)
    assert inner.abs_tol == pytest.approx(1e-13)
    assert inner.max_evals == 20_000
    assert outer.max_evals == 8_000
    assert inner.oscillation_period_hint is None


@pytest.mark.slow
def test_second_l2n_iterate_is_scaled_p2n():
    res = iterate_l2n(parse("exp(-x^2)"), {}, 1, 1.0)
    assert res.status == Status.CONVERGED
    assert res.value == pytest.approx(HALF_E_E1 / 2.0, rel=1e-7)
    assert res.value == pytest.approx(0.1490868, abs=1e-7)


@pytest.mark.slow
def test_second_l2n_iterate_of_sine():
    res = iterate_l2n(parse("sin(x)"), {}, 1, 1.0)
    assert res.value == pytest.approx(math.pi / 4.0 * math.exp(-1.0), rel=1e-6)


@pytest.mark.slow
def test_parseval_members_agree_for_gaussians():
    members = parseval_members(parse("exp(-x^2)"), parse("exp(-x^2)"), {}, 1)
    for value in members.values():
        assert value == pytest.approx(0.125, rel=1e-6)

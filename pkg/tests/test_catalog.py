import pytest

from gptrans_lib.number_crunchers.catalog import (
    ClosedForm,
    CrossCheck,
    ExpectedStatus,
    FreeVar,
    IntegralPlan,
    IteratedPlan,
    LinearCombination,
    OuterIntegralPlan,
    TransformPlan,
    UnknownIdentityError,
    builtin_catalog,
    get_record,
    grid,
    record_ids,
    record_ids_by_anchor,
)
from gptrans_lib.number_crunchers.expr import parse
from gptrans_lib.number_crunchers.transforms import TransformKind

RECORDS = builtin_catalog()


def _templates(plan):
    """Every expression string a plan carries."""
    if isinstance(plan, ClosedForm):
        yield plan.expr
    elif isinstance(plan, TransformPlan):
        yield from (plan.point, plan.function, plan.order, plan.coefficient)
    elif isinstance(plan, IteratedPlan):
        yield from (plan.point, plan.function, plan.order, plan.inner_weight, plan.inner_point, plan.coefficient)
    elif isinstance(plan, IntegralPlan):
        yield from (plan.integrand, plan.coefficient)
        if plan.oscillation:
            yield plan.oscillation
    elif isinstance(plan, OuterIntegralPlan):
        yield from (plan.weight, plan.coefficient)
        if plan.oscillation:
            yield plan.oscillation
        for factor in plan.factors:
            yield from _templates(factor)
    elif isinstance(plan, LinearCombination):
        for coefficient, term in plan.terms:
            yield coefficient
            yield from _templates(term)
    for ref in getattr(plan, "slots", {}).values():
        yield ref.argument


def _plans(record):
    yield record.lhs
    yield record.rhs
    for candidate in record.candidates:
        yield candidate.plan
    for check in record.cross_checks:
        yield check.lhs
        yield check.rhs


ANCHORS = {
    "l2-to-laplace": "R1", "laplace-to-l2": "R2", "l4-reductions": "R3", "ln-to-laplace": "R4",
    "l2n-to-laplace": "R5", "ln-to-l2": "R6", "l2n-to-l2": "R7", "pn-to-stieltjes": "R8",
    "pn-to-widder": "R9", "p2n-to-widder": "R10",
    "laplace-parseval": "G1", "laplace-laplace-stieltjes-parseval": "Y1", "widder-parseval": "SS1",
    "p4-parseval": "W1",
    "ln-after-l2n": "L1", "l2n-after-ln": "L2", "l2n-after-ln-as-iterate": "C1", "ln-lm-rescaling": "C2",
    "erfcx-reciprocal-power-integral": "E1", "sine-erfcx-integral": "E2", "sine-power-erfcx-integral": "E3",
    "cosine-power-erfcx-integral": "E4",
    "l2n-iteration": "L3", "p2n-of-sine": "E5", "p2n-of-cosine-over-power": "E6",
    "parseval-goldstein-f-side": "T1a", "parseval-goldstein-g-side": "T1b", "parseval-goldstein-exchange": "T1c",
    "l2n-iterate-reciprocal-point": "C3", "sine-weighted-p2n": "C4", "l2n-iterate-cubic-weight": "C5",
    "ln-of-power-times-erfc": "X1", "ln-of-bessel": "X2",
}


def test_catalog_size_and_unique_ids():
    ids = record_ids()
    assert len(ids) == 33
    assert len(set(ids)) == len(ids)


def test_every_anchor_maps_to_exactly_one_record():
    anchors = [r.anchor for r in RECORDS]
    assert len(set(anchors)) == len(anchors)
    assert record_ids_by_anchor() == ANCHORS
    assert sorted(ANCHORS.values()) == sorted(record_ids())


@pytest.mark.parametrize("record", RECORDS, ids=lambda r: r.id)
def test_default_points_are_in_range(record):
    assert record.default_points
    for point in record.default_points:
        record.check_point(point)


@pytest.mark.parametrize("record", RECORDS, ids=lambda r: r.id)
def test_plan_templates_parse(record):
    for plan in _plans(record):
        for template in _templates(plan):
            parse(template)


@pytest.mark.parametrize("record", RECORDS, ids=lambda r: r.id)
def test_transform_kinds_are_known(record):
    for plan in _plans(record):
        kinds = []
        if isinstance(plan, TransformPlan):
            kinds.append(plan.kind)
        elif isinstance(plan, IteratedPlan):
            kinds += [plan.outer, plan.inner]
        elif isinstance(plan, OuterIntegralPlan):
            kinds += [f.kind for f in plan.factors]
        for kind in kinds:
            TransformKind.parse(kind)


def test_function_bindings_come_from_free_variables():
    for record in RECORDS:
        names = {v.name for v in record.free_vars}
        for plan in _plans(record):
            for ref in getattr(plan, "slots", {}).values():
                assert ref.name in names, (record.id, ref.name)


def test_expected_statuses():
    must_pass = {r.id for r in RECORDS if r.expected == ExpectedStatus.MUST_PASS}
    assert {"R1", "R2", "R3", "R4", "R5", "R7", "R8", "R10", "L3", "T1a", "T1b", "T1c"} <= must_pass
    assert {"E1", "E2", "E3", "E4", "E5", "X1", "L2"}.isdisjoint(must_pass)


def test_records_with_candidates():
    assert [c.label for c in get_record("E5").candidates] == ["constant pi/(2n)"]
    assert get_record("X1").candidates
    assert get_record("L2").candidates


def test_lookup_is_case_insensitive():
    assert get_record("t1a").id == "T1a"
    assert get_record(" l3 ").id == "L3"


def test_unknown_id_lists_valid_ids():
    with pytest.raises(UnknownIdentityError) as info:
        get_record("Z9")
    assert info.value.valid == record_ids()
    assert "L3" in str(info.value)


def test_check_point_errors():
    record = get_record("L3")
    with pytest.raises(ValueError, match="missing binding"):
        record.check_point({"f": "exp(-x^2)", "n": 1})
    with pytest.raises(ValueError, match="violates"):
        record.check_point({"f": "exp(-x^2)", "n": 1, "z": -1.0})
    with pytest.raises(ValueError, match="violates"):
        record.check_point({"f": "exp(-x^2)", "n": 5, "z": 1.0})


def test_free_var_ranges():
    inclusive = FreeVar("y", lower=1.0, inclusive=True)
    assert inclusive.admits(1.0)
    assert not FreeVar("y", lower=1.0).admits(1.0)
    assert not inclusive.admits("exp(-x)")
    assert FreeVar("v").admits(-3.0)
    assert FreeVar("n", choices=(1, 2)).admits(2.0)
    assert inclusive.describe() == "y >= 1"
    assert FreeVar("n", choices=(1, 2)).describe() == "n in {1, 2}"


def test_grid_is_cartesian_in_argument_order():
    points = grid(n=(1, 2), y=(0.5, 1.0, 2.0))
    assert len(points) == 6
    assert points[0] == {"n": 1, "y": 0.5}
    assert points[-1] == {"n": 2, "y": 2.0}


def test_cross_check_applies_only_on_matching_bindings():
    check = CrossCheck("anchor", ClosedForm("1"), ClosedForm("1"), when={"n": 1, "v": 0.0})
    assert check.applies({"n": 1, "v": 0.0, "a": 2.0})
    assert not check.applies({"n": 2, "v": 0.0})
    assert CrossCheck("always", ClosedForm("1"), ClosedForm("1")).applies({})

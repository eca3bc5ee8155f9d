import os
import math
import hashlib
import datetime
import multiprocessing
import pickle as pkl
from dataclasses import replace
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from tqdm import tqdm

from .toolbox import tprint, relative_error
from .catalog import (
    ClosedForm,
    CrossCheck,
    IdentityRecord,
    IntegralPlan,
    IteratedPlan,
    LinearCombination,
    OuterIntegralPlan,
    Plan,
    Point,
    TransformPlan,
    ExpectedStatus,
    builtin_catalog,
    get_record,
    record_sort_key,
)
from .expr import (
    Expr,
    ExprDomainError,
    UnboundParameterError,
    classify_decay,
    compile_expr,
    contains_x,
    evaluate,
    parse,
    replace_params,
    substitute,
)
from .quad import QuadOptions, QuadResult, Status, Strategy, integrate_auto
from .report import OutcomeStatus, VerificationOutcome, VerificationReport
from .specfun import SpecfunConvergenceError, SpecfunDomainError
from .transforms import (
    ORDERED_KINDS,
    InnerQuadratureError,
    InvalidTransformError,
    TransformKind,
    TransformRequest,
    eval_transform,
    eval_transform_raw,
    iterate_transforms,
    oscillation_of,
    outer_integral,
    scale_result,
    split_budget,
    transform,
)

# Knobs set by the facade before work starts.
NUM_CORES = 1
USE_CACHE = False
SHOW_PROGRESS = True
RESULT_CACHE_FILE: str = "verification_cache.pkl"
MAX_CACHE_LIFE_DAYS = 7

MUST_PASS_TOL = 1e-7
AUDIT_TOL = 1e-5
ABS_FLOOR = 1e-12

# Failures that turn into FAIL outcomes instead of aborting a run.
EVALUATION_ERRORS = (InnerQuadratureError, ExprDomainError, SpecfunDomainError, SpecfunConvergenceError,
                     InvalidTransformError, ZeroDivisionError, OverflowError)

global_shutdown_event = None


def init_worker(shutdown_ev):
    global global_shutdown_event
    global_shutdown_event = shutdown_ev


####################################################################################
# Plan evaluation
####################################################################################

def split_point(point: Mapping[str, object]) -> Tuple[Dict[str, float], Dict[str, str]]:
    """Separates numeric parameters from function bindings (expression strings)."""
    params: Dict[str, float] = {}
    functions: Dict[str, str] = {}
    for name, value in point.items():
        if isinstance(value, str):
            functions[name] = value
        else:
            params[name] = float(value)
    return params, functions


def resolve_template(template: str, slots: Mapping[str, object], functions: Mapping[str, str]) -> Expr:
    """Parses a plan template and fills its function slots from the bindings."""
    mapping = {}
    for slot, ref in slots.items():
        if ref.name not in functions:
            raise UnboundParameterError(ref.name)
        mapping[slot] = substitute(parse(functions[ref.name]), parse(ref.argument))
    return replace_params(parse(template), mapping)


def scalar(text: str, params: Mapping[str, float]) -> float:
    e = parse(text)
    if contains_x(e):
        raise ValueError(f"'{text}' must not depend on x")
    return float(evaluate(e, 0.0, params))


def _kind(name: str, order: str, params: Mapping[str, float]) -> TransformKind:
    kind = TransformKind.parse(name)
    if kind.name in ORDERED_KINDS:
        return TransformKind.parse(name, scalar(order, params))
    return kind


def _point_map(text: str, params: Mapping[str, float]) -> Optional[Callable[[float], float]]:
    if text.strip() == "x":
        return None
    return compile_expr(parse(text), params)


def _weight_map(text: str, params: Mapping[str, float]) -> Optional[Callable[[float], float]]:
    if text.strip() == "1":
        return None
    return compile_expr(parse(text), params)


def _worst(statuses: Sequence[Status]) -> Status:
    for status in (Status.DIVERGENT_SUSPECTED, Status.MAX_EVALS):
        if status in statuses:
            return status
    return Status.CONVERGED


def _closed(value: float) -> QuadResult:
    return QuadResult(float(value), 0.0, 0, Status.CONVERGED, Strategy.AUTO)


def _transform_plan(plan: TransformPlan, params, functions, opts: QuadOptions) -> QuadResult:
    f = resolve_template(plan.function, plan.slots, functions)
    request = TransformRequest(_kind(plan.kind, plan.order, params), f, params, scalar(plan.point, params), opts)
    result = eval_transform_raw(request) if plan.raw else eval_transform(request)
    return scale_result(result, scalar(plan.coefficient, params))


def _iterated_plan(plan: IteratedPlan, params, functions, opts: QuadOptions) -> QuadResult:
    f = resolve_template(plan.function, plan.slots, functions)
    result = iterate_transforms(
        _kind(plan.outer, plan.order, params), _kind(plan.inner, plan.order, params), f, params,
        scalar(plan.point, params), inner_weight=_weight_map(plan.inner_weight, params),
        inner_point=_point_map(plan.inner_point, params), opts=opts)
    return scale_result(result, scalar(plan.coefficient, params))


def _integral_plan(plan: IntegralPlan, params, functions, opts: QuadOptions) -> QuadResult:
    integrand = resolve_template(plan.integrand, plan.slots, functions)
    hints_from = parse(plan.oscillation) if plan.oscillation else integrand
    hints = classify_decay(hints_from, params)
    result = integrate_auto(compile_expr(integrand, params), hints, replace(opts, strategy=plan.strategy))
    return scale_result(result, scalar(plan.coefficient, params))


def _factor(plan: TransformPlan, params, functions, opts: QuadOptions) -> Callable[[float], QuadResult]:
    kind = _kind(plan.kind, plan.order, params)
    f = resolve_template(plan.function, plan.slots, functions)
    fc = compile_expr(f, params)
    oscillation = oscillation_of(f, params)
    where = _point_map(plan.point, params)
    coefficient = scalar(plan.coefficient, params)

    def factor(x: float) -> QuadResult:
        at = x if where is None else float(where(x))
        res = transform(kind, fc, at, opts, oscillation, raw=plan.raw, check_divergence=False)
        return scale_result(res, coefficient)

    return factor


def _outer_plan(plan: OuterIntegralPlan, params, functions, opts: QuadOptions) -> QuadResult:
    weight = resolve_template(plan.weight, plan.slots, functions)
    inner_opts, _ = split_budget(opts)
    factors = [_factor(p, params, functions, inner_opts) for p in plan.factors]
    oscillation = classify_decay(parse(plan.oscillation), params) if plan.oscillation else None
    result = outer_integral(weight, factors, params, opts, oscillation)
    return scale_result(result, scalar(plan.coefficient, params))


def evaluate_plan(plan: Plan, point: Mapping[str, object], opts: Optional[QuadOptions] = None) -> QuadResult:
    """
    Evaluates a catalog plan at one binding set.

    Closed forms come back as CONVERGED results with a zero error estimate.
    """
    opts = opts or QuadOptions()
    params, functions = split_point(point)
    if isinstance(plan, ClosedForm):
        return _closed(scalar(plan.expr, params))
    if isinstance(plan, TransformPlan):
        return _transform_plan(plan, params, functions, opts)
    if isinstance(plan, IteratedPlan):
        return _iterated_plan(plan, params, functions, opts)
    if isinstance(plan, IntegralPlan):
        return _integral_plan(plan, params, functions, opts)
    if isinstance(plan, OuterIntegralPlan):
        return _outer_plan(plan, params, functions, opts)
    if isinstance(plan, LinearCombination):
        value, err, evals, statuses = 0.0, 0.0, 0, []
        for coefficient, term in plan.terms:
            c = scalar(coefficient, params)
            res = evaluate_plan(term, point, opts)
            value += c * res.value
            err += abs(c) * res.err_est
            evals += res.evals
            statuses.append(res.status)
        return QuadResult(value, err, evals, _worst(statuses), Strategy.AUTO)
    raise TypeError(f"unknown plan type {type(plan).__name__}")


####################################################################################
# Comparison
####################################################################################

def default_tolerance(record: IdentityRecord) -> float:
    return MUST_PASS_TOL if record.expected == ExpectedStatus.MUST_PASS else AUDIT_TOL


def agrees(lhs: QuadResult, rhs: QuadResult, tol: float) -> bool:
    """|lhs - rhs| <= max(tol * max(|lhs|, |rhs|), ABS_FLOOR) + both error estimates."""
    if not (math.isfinite(lhs.value) and math.isfinite(rhs.value)):
        return False
    scale = max(abs(lhs.value), abs(rhs.value))
    return abs(lhs.value - rhs.value) <= max(tol * scale, ABS_FLOOR) + lhs.err_est + rhs.err_est


def quadrature_failure(side: str, result: QuadResult, tol: float) -> Optional[str]:
    if result.status == Status.DIVERGENT_SUSPECTED:
        return f"{side} {result.status.value}"
    if result.status == Status.MAX_EVALS and result.err_est > max(tol * abs(result.value), ABS_FLOOR):
        return f"{side} {result.status.value} (err_est {result.err_est:.3g})"
    return None


def _describe(label: str, lhs: QuadResult, rhs: QuadResult) -> str:
    diff = abs(lhs.value - rhs.value)
    return (f"{label}: lhs={lhs.value:.12g} rhs={rhs.value:.12g} abs_err={diff:.3g} "
            f"rel_err={relative_error(lhs.value, rhs.value):.3g}")


def _cross_check(check: CrossCheck, point: Point, tol: float, opts: QuadOptions) -> Tuple[bool, str]:
    try:
        lhs = evaluate_plan(check.lhs, point, opts)
        rhs = evaluate_plan(check.rhs, point, opts)
    except EVALUATION_ERRORS as e:
        return False, f"{check.label}: evaluation failed ({e})"
    failure = quadrature_failure("lhs", lhs, tol) or quadrature_failure("rhs", rhs, tol)
    ok = failure is None and agrees(lhs, rhs, tol)
    verdict = "PASS" if ok else "FAIL"
    text = _describe(f"[{'required' if check.required else 'info'}] {check.label} {verdict}", lhs, rhs)
    if failure:
        text += f" ({failure})"
    return ok, text


def verify_point(record: IdentityRecord, point: Point, tol: Optional[float] = None,
                 opts: Optional[QuadOptions] = None) -> VerificationOutcome:
    """
    Evaluates both sides of `record` at `point` and classifies the outcome.

    PASS when the printed right side agrees; CONDITIONAL when only one of the
    record's candidate right sides agrees (the note names both forms); FAIL
    otherwise, when a quadrature diverges or runs out of evaluations above
    tolerance, or when a required cross-check fails.
    """
    tol = default_tolerance(record) if tol is None else tol
    opts = opts or QuadOptions()
    record.check_point(point)
    nan = float("nan")

    def failed(note: str) -> VerificationOutcome:
        return VerificationOutcome(record.id, dict(point), nan, nan, nan, nan, nan, nan,
                                   OutcomeStatus.FAIL, record.expected.value, note)

    try:
        lhs = evaluate_plan(record.lhs, point, opts)
        rhs = evaluate_plan(record.rhs, point, opts)
    except EVALUATION_ERRORS as e:
        tprint(f"{record.id} at {point}: evaluation failed: {e}")
        return failed(f"evaluation failed: {e}")

    notes: List[str] = []
    failure = quadrature_failure("lhs", lhs, tol) or quadrature_failure("rhs", rhs, tol)
    if failure is not None:
        status = OutcomeStatus.FAIL
        notes.append(failure)
    elif agrees(lhs, rhs, tol):
        status = OutcomeStatus.PASS
    else:
        status = OutcomeStatus.FAIL
        for candidate in record.candidates:
            try:
                alt = evaluate_plan(candidate.plan, point, opts)
            except EVALUATION_ERRORS as e:
                notes.append(f"candidate '{candidate.label}' failed to evaluate ({e})")
                continue
            if quadrature_failure("candidate", alt, tol) is None and agrees(lhs, alt, tol):
                status = OutcomeStatus.CONDITIONAL
                notes.append(f"printed form fails (rhs={rhs.value:.12g}); "
                             f"matches with {candidate.label} (rhs={alt.value:.12g})")
                break
            notes.append(f"candidate '{candidate.label}' also fails (rhs={alt.value:.12g})")

    for check in record.cross_checks:
        if not check.applies(point):
            continue
        ok, text = _cross_check(check, point, tol, opts)
        notes.append(text)
        if check.required and not ok:
            status = OutcomeStatus.FAIL

    abs_err = abs(lhs.value - rhs.value)
    outcome = VerificationOutcome(
        id=record.id, point=dict(point), lhs_value=lhs.value, rhs_value=rhs.value, abs_err=abs_err,
        rel_err=relative_error(lhs.value, rhs.value), lhs_err_est=lhs.err_est, rhs_err_est=rhs.err_est,
        status=status, expected=record.expected.value, note="; ".join(notes),
    )
    if status != OutcomeStatus.PASS:
        tprint(f"{record.id} {status.value} at {point}: lhs={lhs.value:.12g} rhs={rhs.value:.12g} "
               f"abs_err={abs_err:.3g} rel_err={outcome.rel_err:.3g}")
    return outcome


####################################################################################
# Outcome cache
####################################################################################

def _compute_cache_key(record_id: str, point: Point, tol: float, opts: QuadOptions) -> str:
    key_str = f"{record_id}_{sorted(point.items())}_{tol!r}_{opts!r}"
    return hashlib.md5(key_str.encode("utf-8")).hexdigest()


def delete_result_cache() -> None:
    """
    Delete the cached outcome file from the filesystem.
    """
    if os.path.exists(RESULT_CACHE_FILE):
        os.remove(RESULT_CACHE_FILE)


def _load_cache() -> Dict[str, Tuple[VerificationOutcome, datetime.datetime]]:
    if not os.path.exists(RESULT_CACHE_FILE):
        return {}
    try:
        with open(RESULT_CACHE_FILE, "rb") as f:
            return pkl.load(f)
    except Exception as e:
        tprint(f"Cache load error: {e}")
        return {}


def _cached_outcome(cache, key: str) -> Optional[VerificationOutcome]:
    if key not in cache:
        return None
    outcome, time_saved = cache[key]
    now = datetime.datetime.now(tz=datetime.timezone.utc)
    if now - time_saved > datetime.timedelta(days=MAX_CACHE_LIFE_DAYS):
        del cache[key]
        return None
    return outcome


def _save_cache(cache) -> None:
    directory = os.path.dirname(RESULT_CACHE_FILE)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    with open(RESULT_CACHE_FILE, "wb") as f:
        pkl.dump(cache, f)


####################################################################################
# verify / audit
####################################################################################

def _verify_task(args) -> Optional[VerificationOutcome]:
    record_id, point, tol, opts = args
    if global_shutdown_event and global_shutdown_event.is_set():
        return None
    record = get_record(record_id)
    return verify_point(record, point, tol, opts)


def _run_tasks(tasks: List[tuple], desc: str) -> List[VerificationOutcome]:
    """Runs verify tasks serially or on a worker pool; results keep the task order."""
    cache = _load_cache() if USE_CACHE else {}
    keys = [_compute_cache_key(*task) for task in tasks]
    results: List[Optional[VerificationOutcome]] = [_cached_outcome(cache, k) for k in keys]
    pending = [i for i, r in enumerate(results) if r is None]
    if USE_CACHE and len(pending) < len(tasks):
        tprint(f"Cache hit for {len(tasks) - len(pending)} of {len(tasks)} record-points.")

    shutdown_event = multiprocessing.Event()
    args_list = [tasks[i] for i in pending]
    try:
        if NUM_CORES > 1 and len(args_list) > 1:
            with multiprocessing.Pool(processes=NUM_CORES, initializer=init_worker, initargs=(shutdown_event,)) as pool:
                computed = list(tqdm(pool.imap(_verify_task, iterable=args_list), desc=desc,
                                     total=len(args_list), disable=not SHOW_PROGRESS))
        else:
            computed = [_verify_task(args) for args in tqdm(args_list, desc=desc, total=len(args_list),
                                                            disable=not SHOW_PROGRESS)]
    except KeyboardInterrupt:
        shutdown_event.set()
        tprint("Verification interrupted.")
        raise

    now = datetime.datetime.now(tz=datetime.timezone.utc)
    for i, outcome in zip(pending, computed):
        results[i] = outcome
        if USE_CACHE and outcome is not None:
            cache[keys[i]] = (outcome, now)
    if USE_CACHE:
        _save_cache(cache)
    return [r for r in results if r is not None]


def verify(record: IdentityRecord, points: Optional[Sequence[Point]] = None, tol: Optional[float] = None,
           opts: Optional[QuadOptions] = None) -> List[VerificationOutcome]:
    """
    Verifies a record at the given points (its default points when omitted).

    Raises:
        ValueError: If tol is not positive or a point is outside the record's ranges.
    """
    if tol is not None and not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    opts = opts or QuadOptions()
    points = list(record.default_points if points is None else points)
    for point in points:
        record.check_point(point)
    tasks = [(record.id, dict(point), tol if tol is not None else default_tolerance(record), opts)
             for point in points]
    return _run_tasks(tasks, desc=f"Verifying {record.id}")


def audit(tol: Optional[float] = None, opts: Optional[QuadOptions] = None,
          record_ids: Optional[Sequence[str]] = None, meta: Optional[dict] = None) -> VerificationReport:
    """
    Runs every record at all of its default points.

    With tol omitted each record uses the tolerance of its expected status
    (MUST_PASS_TOL or AUDIT_TOL). Outcomes are ordered by record id (see
    catalog.record_sort_key), then point order, whatever the worker count.
    """
    if tol is not None and not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    opts = opts or QuadOptions()
    records = builtin_catalog() if record_ids is None else [get_record(i) for i in record_ids]
    records = sorted(records, key=lambda r: record_sort_key(r.id))
    tasks = [(r.id, dict(p), tol if tol is not None else default_tolerance(r), opts)
             for r in records for p in r.default_points]
    tprint(f"Auditing {len(records)} records at {len(tasks)} record-points.")
    outcomes = _run_tasks(tasks, desc="Auditing identities")
    report = VerificationReport(outcomes=outcomes, meta=dict(meta or {}))
    summary = report.summary()
    tprint("Audit finished: " + ", ".join(f"{k}={v}" for k, v in summary.items()))
    return report

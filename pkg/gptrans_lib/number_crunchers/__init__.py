from .specfun import (
    AccuracyBudget,
    DEFAULT_BUDGET,
    SpecfunDomainError,
    SpecfunConvergenceError,
    erf,
    erfc,
    erfcx,
    gamma,
    log_gamma,
    besselj,
    exp_e1,
)
from .quad import (
    Strategy,
    Status,
    QuadOptions,
    QuadResult,
    InvalidQuadOptions,
    UnclassifiedIntegrandError,
    substitute_power,
    integrate_finite,
    integrate_decay,
    integrate_algebraic,
    integrate_oscillatory,
    integrate_abel,
    integrate_auto,
)
from .expr import (
    ParseError,
    UnboundParameterError,
    ExprDomainError,
    DecayKind,
    DecayClass,
    parse,
    to_string,
    substitute,
    replace_params,
    free_parameters,
    evaluate,
    compile_expr,
    classify_decay,
)
from .transforms import (
    InvalidTransformError,
    InnerQuadratureError,
    TransformKind,
    TransformRequest,
    canonical_form,
    eval_transform,
    eval_transform_raw,
    iterate_transforms,
    iterate_l2n,
    outer_integral,
    parseval_members,
)
from .catalog import (
    UnknownIdentityError,
    IdentityRecord,
    builtin_catalog,
    get_record,
    record_ids_by_anchor,
    record_sort_key,
)
from .verification import (
    evaluate_plan,
    verify,
    verify_point,
    audit,
    delete_result_cache,
)
from .report import (
    OutcomeStatus,
    VerificationOutcome,
    VerificationReport,
    outcomes_frame,
    serialize_report,
    parse_report,
    export_report,
)
from .toolbox import (
    tprint,
    cpu_pct_to_cores,
    relative_error,
)

__all__ = [
    # specfun
    "AccuracyBudget",
    "DEFAULT_BUDGET",
    "SpecfunDomainError",
    "SpecfunConvergenceError",
    "erf",
    "erfc",
    "erfcx",
    "gamma",
    "log_gamma",
    "besselj",
    "exp_e1",
    # quad
    "Strategy",
    "Status",
    "QuadOptions",
    "QuadResult",
    "InvalidQuadOptions",
    "UnclassifiedIntegrandError",
    "substitute_power",
    "integrate_finite",
    "integrate_decay",
    "integrate_algebraic",
    "integrate_oscillatory",
    "integrate_abel",
    "integrate_auto",
    # expr
    "ParseError",
    "UnboundParameterError",
    "ExprDomainError",
    "DecayKind",
    "DecayClass",
    "parse",
    "to_string",
    "substitute",
    "replace_params",
    "free_parameters",
    "evaluate",
    "compile_expr",
    "classify_decay",
    # transforms
    "InvalidTransformError",
    "InnerQuadratureError",
    "TransformKind",
    "TransformRequest",
    "canonical_form",
    "eval_transform",
    "eval_transform_raw",
    "iterate_transforms",
    "iterate_l2n",
    "outer_integral",
    "parseval_members",
    # catalog
    "UnknownIdentityError",
    "IdentityRecord",
    "builtin_catalog",
    "get_record",
    "record_ids_by_anchor",
    "record_sort_key",
    # verification
    "evaluate_plan",
    "verify",
    "verify_point",
    "audit",
    "delete_result_cache",
    # report
    "OutcomeStatus",
    "VerificationOutcome",
    "VerificationReport",
    "outcomes_frame",
    "serialize_report",
    "parse_report",
    "export_report",
    # toolbox
    "tprint",
    "cpu_pct_to_cores",
    "relative_error",
]

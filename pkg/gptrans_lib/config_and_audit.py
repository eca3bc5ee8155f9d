"""
Generalized Laplace and Stieltjes Transform Module

This module evaluates the L_n, L_2n, P_n and P_2n transforms (and the
classical Laplace, L_2, Stieltjes and Widder potential transforms) by:
  1. Parsing integrand expressions into a small AST.
  2. Reducing each transform to a classical kernel and integrating it with
     double-exponential or oscillatory quadrature.
  3. Checking a catalog of transform identities at sampled points,
     optionally on a worker pool with a result cache.
  4. Exporting the verification report as a table, JSON or CSV.
"""

import os
from typing import Dict, List, Optional, Sequence

from . import __version__
from .number_crunchers import verification, catalog, report, toolbox
from .number_crunchers.expr import DecayKind, classify_decay, compile_expr, parse
from .number_crunchers.quad import QuadOptions, QuadResult, Strategy, integrate_auto
from .number_crunchers.report import VerificationOutcome, VerificationReport
from .number_crunchers.toolbox import tprint
from .number_crunchers.transforms import TransformKind, TransformRequest, eval_transform, eval_transform_raw

MAX_EVALS_ENV = "GPTRANS_MAX_EVALS"


class GptransConfig:
    """
    Configuration settings for transform evaluation and identity verification.
    """
    def __init__(self,
                 num_cores: int = 1,
                 rel_tol: float = 1e-10,
                 abs_tol: float = 1e-14,
                 max_evals: int = 2_000_000,
                 must_pass_tol: float = 1e-7,
                 audit_tol: float = 1e-5,
                 cache_dir: str = "gptrans_cache",
                 use_cache: bool = False,
                 max_cache_life_days: int = 7,
                 show_progress: bool = True):
        self.num_cores = num_cores
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_evals = max_evals
        self.must_pass_tol = must_pass_tol
        self.audit_tol = audit_tol
        self.show_progress = show_progress

        self.cache_dir = cache_dir
        self.use_cache = use_cache
        self.max_cache_life_days = max_cache_life_days
        self.cache_path = os.path.join(cache_dir, "verification_cache.pkl")

        if self.use_cache:
            os.makedirs(self.cache_dir, exist_ok=True)

    def effective_max_evals(self) -> int:
        """
        max_evals, overridden by the GPTRANS_MAX_EVALS environment variable.

        Raises:
          ValueError: If the environment variable is not a positive integer.
        """
        raw = os.environ.get(MAX_EVALS_ENV)
        if raw is None or raw.strip() == "":
            return self.max_evals
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{MAX_EVALS_ENV} must be a positive integer, got '{raw}'") from None
        if value < 1:
            raise ValueError(f"{MAX_EVALS_ENV} must be a positive integer, got '{raw}'")
        return value

    def quad_options(self, **overrides) -> QuadOptions:
        fields = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol, max_evals=self.effective_max_evals())
        fields.update(overrides)
        return QuadOptions(**fields)


def _configure_workers(config: GptransConfig) -> None:
    verification.NUM_CORES = config.num_cores
    verification.USE_CACHE = config.use_cache
    verification.RESULT_CACHE_FILE = config.cache_path
    verification.MAX_CACHE_LIFE_DAYS = config.max_cache_life_days
    verification.SHOW_PROGRESS = config.show_progress
    verification.MUST_PASS_TOL = config.must_pass_tol
    verification.AUDIT_TOL = config.audit_tol


def evaluate_transform(kind: str, f: str, point: float, config: GptransConfig, n: int = 1,
                       params: Optional[Dict[str, float]] = None, raw: bool = False) -> QuadResult:
    """
    Evaluates one transform of an expression at one point.

    Args:
        kind: Transform name (laplace, l2, ln, l2n, stieltjes, pn, p2n, widder).
        f: Expression in x, e.g. "exp(-x^2)".
        point: Positive evaluation point.
        config: An instance of GptransConfig.
        n: Order for ln/l2n/pn/p2n.
        params: Parameter bindings for the expression.
        raw: Integrate the defining integral instead of the reduced form.

    Returns:
        QuadResult: value, error estimate, evaluation count and status.
    """
    request = TransformRequest(TransformKind.parse(kind, n), parse(f), dict(params or {}), point,
                               config.quad_options())
    return eval_transform_raw(request) if raw else eval_transform(request)


def integrate_expression(f: str, config: GptransConfig, strategy: str = "auto",
                         params: Optional[Dict[str, float]] = None, period: Optional[float] = None) -> QuadResult:
    """
    Integrates an expression in x over (0, inf) with the chosen strategy.

    Args:
        f: Expression in x.
        config: An instance of GptransConfig.
        strategy: auto, decay, algebraic, oscillatory or abel.
        params: Parameter bindings.
        period: Oscillation period hint (required for oscillatory unless the
            expression's own oscillation can be classified).
    """
    params = dict(params or {})
    e = parse(f)
    hints = classify_decay(e, params)
    if period is None and hints.kind == DecayKind.OSCILLATORY:
        period = hints.period
    opts = config.quad_options(strategy=Strategy(strategy.upper()), oscillation_period_hint=period)
    return integrate_auto(compile_expr(e, params), hints, opts)


def list_identities() -> List[catalog.IdentityRecord]:
    return catalog.builtin_catalog()


def verify_identity(record_id: str, config: GptransConfig, points: Optional[Sequence[dict]] = None,
                    tol: Optional[float] = None) -> VerificationReport:
    """
    Verifies one catalog record at its default points or at the given points.

    Raises:
        UnknownIdentityError: If the id is not in the catalog.
    """
    _configure_workers(config)
    record = catalog.get_record(record_id)
    outcomes: List[VerificationOutcome] = verification.verify(record, points, tol, config.quad_options())
    return VerificationReport(outcomes=outcomes, meta=report.run_metadata(__version__))


def audit_identities(config: GptransConfig, tol: Optional[float] = None,
                     record_ids: Optional[Sequence[str]] = None) -> VerificationReport:
    """
    Runs every catalog record (or the listed ones) at its default points.
    """
    _configure_workers(config)
    tprint(f"Using {config.num_cores} core(s).")
    return verification.audit(tol, config.quad_options(), record_ids, meta=report.run_metadata(__version__))


def export_report(verification_report: VerificationReport, fmt: str = "table",
                  output_path: Optional[str] = None) -> str:
    return report.export_report(verification_report, fmt, output_path)


def delete_pkl_cache(config: GptransConfig) -> None:
    """
    This function deletes the pickled verification cache
    """
    verification.RESULT_CACHE_FILE = config.cache_path
    verification.delete_result_cache()


def cores_from_fraction(pct: float) -> int:
    return toolbox.cpu_pct_to_cores(pct)

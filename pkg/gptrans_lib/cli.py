"""
Command-line surface.

    gptrans eval --kind p2n --n 1 --f "sin(x)" --at 1
    gptrans quad --f "exp(-x)" --strategy decay
    gptrans identity list
    gptrans identity verify L3 --tol 1e-7
    gptrans identity audit --format json --out report.json

Exit codes: 0 success, 1 usage or parse error, 2 non-convergence or a
MUST_PASS failure. Progress and log lines go to stderr; stdout only carries
the requested table/JSON/CSV.
"""

import sys
import json
import argparse
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from . import __version__
from .config_and_audit import (
    GptransConfig,
    audit_identities,
    evaluate_transform,
    export_report,
    integrate_expression,
    list_identities,
    verify_identity,
)
from .number_crunchers import toolbox
from .number_crunchers.catalog import UnknownIdentityError
from .number_crunchers.expr import ExprDomainError, ParseError, UnboundParameterError
from .number_crunchers.quad import InvalidQuadOptions, QuadResult, Status, UnclassifiedIntegrandError
from .number_crunchers.specfun import SpecfunDomainError
from .number_crunchers.transforms import InnerQuadratureError, InvalidTransformError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

FORMATS = ("table", "json", "csv")
KINDS = ("laplace", "l2", "ln", "l2n", "stieltjes", "pn", "p2n", "widder")
STRATEGIES = ("auto", "decay", "algebraic", "oscillatory", "abel")

USAGE_ERRORS = (ParseError, InvalidTransformError, UnknownIdentityError, UnboundParameterError, ExprDomainError,
                InvalidQuadOptions, UnclassifiedIntegrandError, SpecfunDomainError, ValueError)


class CliUsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliUsageError(message)


def _parse_binding(text: str) -> Dict[str, Union[float, str]]:
    name, sep, value = text.partition("=")
    name = name.strip()
    if not sep or not name.isidentifier():
        raise CliUsageError(f"expected name=value, got '{text}'")
    value = value.strip()
    try:
        return {name: float(value)}
    except ValueError:
        return {name: value}


def _parse_params(items: Optional[Sequence[str]]) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for item in items or []:
        binding = _parse_binding(item)
        name, value = next(iter(binding.items()))
        if isinstance(value, str):
            raise CliUsageError(f"parameter '{name}' must be a number, got '{value}'")
        params[name] = value
    return params


def _parse_point(text: str) -> Dict[str, Union[float, str]]:
    """'f=exp(-x^2); n=1; z=1' -> {"f": "exp(-x^2)", "n": 1.0, "z": 1.0}."""
    point: Dict[str, Union[float, str]] = {}
    for item in text.split(";"):
        if item.strip():
            point.update(_parse_binding(item))
    if not point:
        raise CliUsageError("empty --point")
    return point


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="gptrans", description="Generalized Laplace/Stieltjes transforms and identity checks.")
    p.add_argument("--version", action="version", version=f"gptrans {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def add_output(sp):
        sp.add_argument("--format", choices=FORMATS, default="table", help="Output format (default: table).")
        sp.add_argument("--out", default=None, help="Write the output to this path instead of stdout.")

    def add_numerics(sp):
        sp.add_argument("--rel-tol", type=_positive_float, default=None, dest="rel_tol", help="Quadrature rel_tol.")
        sp.add_argument("--max-evals", type=int, default=None, dest="max_evals", help="Quadrature evaluation budget.")

    ev = sub.add_parser("eval", help="Evaluate a transform at one or more points.")
    ev.add_argument("--kind", required=True, choices=KINDS)
    ev.add_argument("--n", type=int, default=1, help="Order for ln/l2n/pn/p2n.")
    ev.add_argument("--f", required=True, help="Expression in x, e.g. 'exp(-x^2)'.")
    ev.add_argument("--at", type=_positive_float, action="append", required=True, help="Evaluation point (repeatable).")
    ev.add_argument("--param", action="append", default=[], help="Parameter binding name=value (repeatable).")
    ev.add_argument("--raw", action="store_true", help="Integrate the defining integral without reduction.")
    add_output(ev)
    add_numerics(ev)

    qd = sub.add_parser("quad", help="Integrate an expression over (0, inf).")
    qd.add_argument("--f", required=True)
    qd.add_argument("--strategy", choices=STRATEGIES, default="auto")
    qd.add_argument("--period", type=_positive_float, default=None, help="Oscillation period hint.")
    qd.add_argument("--param", action="append", default=[])
    add_output(qd)
    add_numerics(qd)

    ident = sub.add_parser("identity", help="List, verify or audit catalog identities.")
    actions = ident.add_subparsers(dest="action", required=True, parser_class=_ArgumentParser)
    ls = actions.add_parser("list", help="List the catalog records.")
    add_output(ls)
    for name in ("verify", "audit"):
        sp = actions.add_parser(name, help=f"{name.capitalize()} identities.")
        if name == "verify":
            sp.add_argument("id", help="Record id, e.g. L3.")
            sp.add_argument("--point", action="append", default=None,
                            help="Binding set 'f=exp(-x^2); n=1; z=1' (repeatable); default points otherwise.")
        else:
            sp.add_argument("--only", action="append", default=None, help="Restrict the audit to these ids.")
        sp.add_argument("--tol", type=_positive_float, default=None, help="Comparison tolerance.")
        sp.add_argument("--jobs", type=int, default=0, help="Worker processes; 0 uses all cores (default).")
        sp.add_argument("--cache", action="store_true", help="Reuse cached outcomes.")
        sp.add_argument("--no-progress", action="store_true", dest="no_progress", help="Disable progress bars.")
        add_output(sp)
        add_numerics(sp)
    return p


def _config(args) -> GptransConfig:
    kwargs = {}
    if getattr(args, "rel_tol", None) is not None:
        kwargs["rel_tol"] = args.rel_tol
    if getattr(args, "max_evals", None) is not None:
        kwargs["max_evals"] = args.max_evals
    jobs = getattr(args, "jobs", 1)
    if jobs < 0:
        raise CliUsageError("--jobs must be 0 or positive")
    kwargs["num_cores"] = toolbox.cpu_pct_to_cores(1.0) if jobs == 0 else jobs
    kwargs["use_cache"] = getattr(args, "cache", False)
    kwargs["show_progress"] = not getattr(args, "no_progress", False)
    return GptransConfig(**kwargs)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        toolbox.tprint(f"Wrote {out}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _render_rows(rows: List[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2)
    df = pd.DataFrame(rows)
    if fmt == "csv":
        return df.to_csv(index=False)
    return df.to_string(index=False, float_format=lambda v: f"{v:.12g}")


def _result_row(result: QuadResult, **extra) -> dict:
    row = dict(extra)
    row.update(value=result.value, err_est=result.err_est, evals=result.evals, status=result.status.value,
               strategy=result.strategy_used.value)
    return row


def cmd_eval(args) -> int:
    config = _config(args)
    params = _parse_params(args.param)
    rows = []
    for point in args.at:
        result = evaluate_transform(args.kind, args.f, point, config, n=args.n, params=params, raw=args.raw)
        rows.append(_result_row(result, point=point))
    _emit(_render_rows(rows, args.format), args.out)
    return EXIT_OK if all(r["status"] == Status.CONVERGED.value for r in rows) else EXIT_NUMERICAL


def cmd_quad(args) -> int:
    config = _config(args)
    result = integrate_expression(args.f, config, args.strategy, _parse_params(args.param), args.period)
    _emit(_render_rows([_result_row(result)], args.format), args.out)
    if result.status == Status.DIVERGENT_SUSPECTED:
        sys.stderr.write(f"integral of '{args.f}' looks divergent under {args.strategy}\n")
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def cmd_identity(args) -> int:
    if args.action == "list":
        rows = [{"id": r.id, "title": r.title, "anchor": r.anchor, "expected": r.expected.value,
                 "interpretation": r.interpretation.value, "points": len(r.default_points)}
                for r in list_identities()]
        _emit(_render_rows(rows, args.format), args.out)
        return EXIT_OK

    config = _config(args)
    if args.action == "verify":
        points = [_parse_point(p) for p in args.point] if args.point else None
        verification_report = verify_identity(args.id, config, points, args.tol)
    else:
        verification_report = audit_identities(config, args.tol, args.only)
    text = export_report(verification_report, args.format, args.out)
    if not args.out:
        _emit(text, None)
    return EXIT_OK if verification_report.ok else EXIT_NUMERICAL


def _report_parse_error(e: ParseError, args) -> None:
    source = getattr(args, "f", None)
    sys.stderr.write(f"parse error: {e}\n")
    if source:
        sys.stderr.write(f"  {source}\n  {' ' * e.position}^\n")


def main(argv: Optional[List[str]] = None) -> int:
    toolbox.LOG_STREAM = sys.stderr
    parser = _build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "quad":
            return cmd_quad(args)
        return cmd_identity(args)
    except CliUsageError as e:
        sys.stderr.write(f"gptrans: error: {e}\n")
        return EXIT_USAGE
    except ParseError as e:
        _report_parse_error(e, args)
        return EXIT_USAGE
    except UnknownIdentityError as e:
        sys.stderr.write(f"gptrans: error: {e}\n")
        return EXIT_USAGE
    except InnerQuadratureError as e:
        sys.stderr.write(f"gptrans: {e}\n")
        return EXIT_NUMERICAL
    except USAGE_ERRORS as e:
        sys.stderr.write(f"gptrans: error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

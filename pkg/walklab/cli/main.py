"""Command-line entry point.

Exit codes: 0 success, 1 a mathematical identity failed, 2 usage or
resource errors (bad flags, caps exceeded, unwritable output).
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import IO

import sentry_sdk
from pydantic import ValidationError as PydanticValidationError

from walklab import __version__
from walklab.core.exceptions import (
    CapacityError,
    IdentityViolation,
    SimulationError,
    ValidationError,
)
from walklab.core.logging import log_with_context, logger
from walklab.models.limits import HRule
from walklab.models.params import make_params
from walklab.models.reports import LimitReport, VarianceReport
from walklab.models.run_config import RunConfig
from walklab.services.chain_service import chain_service
from walklab.services.limit_service import DEFAULT_ALPHAS, limit_service
from walklab.services.simulation_service import simulation_service
from walklab.services.verification_service import verification_service
from walklab.utils.output import (
    SCAN_HEADER,
    TABLE_VARIANTS,
    TRAJECTORY_HEADER,
    format_float,
    scan_rows,
    table_header,
    table_row,
    trajectory_rows,
    write_csv,
    write_json,
)

EXIT_OK = 0
EXIT_IDENTITY = 1
EXIT_USAGE = 2

METHODS = ("formula", "stationary", "llt", "all")


@contextmanager
def _output(path: Path | None) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    with path.open("w", newline="", encoding="utf-8") as stream:
        yield stream


def _fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator} ~ {format_float(value)}"


def _config(args: argparse.Namespace, **fields: object) -> RunConfig:
    try:
        return RunConfig(command=args.command, **fields)
    except PydanticValidationError as e:
        raise ValidationError(
            "Invalid command configuration", {"errors": [err["msg"] for err in e.errors()]}
        ) from e


def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args, K_max=args.K_max)
    report = verification_service.run_suite(config.K_max, inject_fault=args.inject_fault)
    for result in report.results:
        if result.passed:
            print(f"PASS {result.name} ({result.checked} cases)")
        else:
            detail = json.dumps(result.counterexample, sort_keys=True, default=str)
            print(f"FAIL {result.name}: {detail}")
    if report.passed:
        return EXIT_OK
    identity_failures = [r for r in report.results if not r.passed and r.error != "capacity"]
    return EXIT_IDENTITY if identity_failures else EXIT_USAGE


def cmd_variance(args: argparse.Namespace) -> int:
    config = _config(args, K=args.K, h=args.h)
    params = make_params(args.K, args.h)
    evaluations: dict[str, Callable[[], Fraction]] = {
        "formula": lambda: chain_service.closed_form_sigma2(params),
        "stationary": lambda: chain_service.exact_sigma2(params).stationary,
        "llt": lambda: limit_service.sigma2_via_llt(params),
    }
    methods = list(evaluations) if args.method == "all" else [args.method]
    values = {method: evaluations[method]() for method in methods}
    for method, value in values.items():
        print(f"{method}: {_fraction(value)}")

    if len(set(values.values())) > 1:
        raise IdentityViolation(
            f"Variance methods disagree for {params.label()}",
            identity="triple_agreement",
            counterexample={"K": config.K, "h": config.h, **{m: str(v) for m, v in values.items()}},
        )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(
        args,
        K=args.K,
        h=args.h,
        n=args.n,
        replicas=args.replicas,
        seed=args.seed,
        stride=args.stride,
        parallelism=args.parallelism,
        output_path=args.out,
        trajectory_path=args.trajectory_out,
        format=args.format,
        initial=args.initial,
        unconstrained=args.unconstrained,
    )
    params = make_params(args.K, args.h)

    if config.trajectory_path is not None or config.replicas == 1:
        trajectory = simulation_service.simulate(
            params, config.n, config.seed, config.stride, config.initial, config.unconstrained
        )
        path = config.trajectory_path or (config.output_path if config.replicas == 1 else None)
        with _output(path) as stream:
            write_csv(stream, TRAJECTORY_HEADER, trajectory_rows(trajectory))
    if config.replicas == 1:
        return EXIT_OK

    estimate = simulation_service.estimate_variance(
        params,
        config.n,
        config.replicas,
        config.seed,
        config.parallelism,
        unconstrained=config.unconstrained,
        initial=config.initial,
    )
    exact = (
        limit_service.sigma2_star(params.K)
        if config.unconstrained
        else chain_service.closed_form_sigma2(params)
    )
    report = VarianceReport(
        K=params.K,
        h=params.h,
        n=config.n,
        replicas=config.replicas,
        seed=config.seed,
        estimate=estimate.estimate,
        std_error=estimate.std_error,
        exact_value_numerator=exact.numerator,
        exact_value_denominator=exact.denominator,
    )
    with _output(config.output_path) as stream:
        if config.format == "json":
            write_json(stream, report)
        else:
            fields = report.model_dump()
            row = [format_float(v) if isinstance(v, float) else v for v in fields.values()]
            write_csv(stream, list(fields), [row])

    summary = sys.stdout if config.output_path is not None else sys.stderr
    print(
        f"exact {_fraction(exact)}; estimate {format_float(estimate.estimate)} "
        f"+/- {format_float(estimate.std_error)}; z-score {estimate.z_score(exact):.3f}; "
        f"half-time covariance {format_float(estimate.half_time_covariance)}",
        file=summary,
    )
    return EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    config = _config(args, K_max=args.K_max, output_path=args.out, variants=args.variant)
    rows = limit_service.asymptotic_ratio_scan(HRule(fixed=0), config.K_max, K_min=2)
    csv_rows = []
    for row in rows:
        assert row.u_K is not None
        line = table_row(
            row.K, row.sigma2, row.u_K, limit_service.sigma2_star(row.K), config.variants
        )
        if line[-1] == "1":
            log_with_context(
                logger, logging.WARNING, "Variance not above the unconstrained value", K=row.K
            )
        csv_rows.append(line)
    with _output(config.output_path) as stream:
        write_csv(stream, table_header(config.variants), csv_rows)
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    alphas = args.alpha if args.alpha is not None else (
        list(DEFAULT_ALPHAS) if args.h is None else []
    )
    gaps = args.h if args.h is not None else ([0] if args.alpha is None else [])
    config = _config(args, K_max=args.K_max, alpha_list=alphas, output_path=args.out)
    rules = [HRule(fixed=h) for h in gaps] + [HRule(alpha=a) for a in config.alpha_list]
    csv_rows = []
    for rule in rules:
        csv_rows.extend(scan_rows(limit_service.asymptotic_ratio_scan(rule, config.K_max), str(rule)))
    with _output(config.output_path) as stream:
        write_csv(stream, SCAN_HEADER, csv_rows)
    return EXIT_OK


def cmd_llt(args: argparse.Namespace) -> int:
    config = _config(args, K_max=args.K_max, output_path=args.out)
    report = LimitReport(
        llt_constant=limit_service.empirical_llt_constant(args.n_min, args.n_max),
        upper_bound=limit_service.inequality_ii_check(config.K_max),
        lower_bound=limit_service.inequality_iii_check(config.K_max),
    )
    with _output(config.output_path) as stream:
        write_json(stream, report)
    if not report.upper_bound.passed:
        raise IdentityViolation(
            "P[S_K = 1] < P[S_K = 0] fails",
            identity="upper_bound",
            counterexample={"K": report.upper_bound.violations[0]},
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walklab",
        description="Exact and Monte Carlo study of the constrained multi-walker random walk.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="run the exhaustive identity suite")
    verify.add_argument("--K-max", dest="K_max", type=int, default=8)
    verify.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    verify.set_defaults(handler=cmd_verify)

    variance = commands.add_parser("variance", help="exact sigma^2_{K,h}")
    variance.add_argument("--K", type=int, required=True)
    variance.add_argument("--h", type=int, required=True)
    variance.add_argument("--method", choices=METHODS, default="formula")
    variance.set_defaults(handler=cmd_variance)

    simulate = commands.add_parser("simulate", help="Monte Carlo trajectories and variance")
    simulate.add_argument("--K", type=int, required=True)
    simulate.add_argument("--h", type=int, required=True)
    simulate.add_argument("--n", type=int, default=10_000)
    simulate.add_argument("--replicas", type=int, default=1)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--stride", type=int, default=1)
    simulate.add_argument("--parallelism", type=int, default=None)
    simulate.add_argument("--out", type=Path, default=None)
    simulate.add_argument("--trajectory-out", dest="trajectory_out", type=Path, default=None)
    simulate.add_argument("--format", choices=("json", "csv"), default="json")
    simulate.add_argument("--initial", choices=("default", "uniform"), default="default")
    simulate.add_argument("--unconstrained", action="store_true")
    simulate.set_defaults(handler=cmd_simulate)

    table = commands.add_parser("table", help="sigma^2_{K,0} against 2/K and 2/(K+2)")
    table.add_argument("--K-max", dest="K_max", type=int, default=400)
    table.add_argument("--out", type=Path, default=None)
    table.add_argument(
        "--variant", nargs="+", choices=TABLE_VARIANTS, default=list(TABLE_VARIANTS),
        help="optional column groups: u (u_K) and star (sigma^2_{K,*})",
    )
    table.set_defaults(handler=cmd_table)

    scan = commands.add_parser("scan", help="K sigma^2_{K,h(K)} for fixed gaps and h = K^alpha")
    scan.add_argument("--K-max", dest="K_max", type=int, default=400)
    scan.add_argument("--h", type=int, nargs="+", default=None)
    scan.add_argument("--alpha", type=float, nargs="+", default=None)
    scan.add_argument("--out", type=Path, default=None)
    scan.set_defaults(handler=cmd_scan)

    llt = commands.add_parser("llt", help="local limit diagnostics of the lazy walk")
    llt.add_argument("--n-min", dest="n_min", type=int, default=50)
    llt.add_argument("--n-max", dest="n_max", type=int, default=200)
    llt.add_argument("--K-max", dest="K_max", type=int, default=400)
    llt.add_argument("--out", type=Path, default=None)
    llt.set_defaults(handler=cmd_llt)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except IdentityViolation as e:
        print(f"identity violated ({e.identity}): {e.message}", file=sys.stderr)
        print(json.dumps(e.counterexample, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_IDENTITY
    except (ValidationError, CapacityError, SimulationError) as e:
        print(f"error: {e.message} {json.dumps(e.details, default=str)}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: cannot write {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        sentry_sdk.capture_exception(e)
        logger.exception(f"Unexpected error: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

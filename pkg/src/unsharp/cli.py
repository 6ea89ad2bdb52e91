"""Command-line interface.

Exit codes: 0 on success, 1 when the input violates a domain invariant (an
invalid POVM or state), 2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as uio
from .instruments import (
    PROBE_LABELS,
    PROBE_VECTORS,
    InstrumentKind,
    estimate_qubit_e_matrix,
    estimate_qubit_x_matrix,
    repeat_probability_exact,
    sample_sequential,
)
from .measures import REPORT_KEYS, measure_report
from .monotonicity import GRID_COLUMNS, SWEEP_COLUMNS, dichotomic_grid_scan, lambda_sweep
from .observables import InvalidPovmError, InvalidStateError, density_matrix, fuzzify_white_noise, maximally_mixed
from .search import conjecture_scan

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

CSV_COMMANDS = ("measures", "sweep", "grid")


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    if not args.input:
        raise UsageError(f"{args.command}: --input is required")
    try:
        return uio.load_povm(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None


def _state(spec: str, d: int) -> np.ndarray:
    if spec == "mixed":
        return maximally_mixed(d)
    if spec in PROBE_VECTORS:
        if d != 2:
            raise UsageError(f"probe state {spec!r} needs a qubit observable")
        v = PROBE_VECTORS[spec]
        return np.outer(v, v.conj())
    try:
        with open(spec, encoding="utf-8") as fh:
            rho = uio.state_from_dict(uio.loads(fh.read()))
    except OSError as exc:
        raise UsageError(f"cannot read state file {spec}: {exc.strerror}") from None
    return density_matrix(rho)


def cmd_validate(args) -> str:
    povm = _load(args)
    return f"valid POVM: n={povm.n}, d={povm.dim}\n"


def cmd_measures(args) -> str:
    report = measure_report(_load(args)).to_dict()
    if args.format == "csv":
        return uio.to_csv([report], REPORT_KEYS)
    return uio.dumps(report)


def cmd_fuzzify(args) -> str:
    return uio.povm_to_json(fuzzify_white_noise(_load(args), args.lam))


def cmd_sweep(args) -> str:
    if args.lambda_steps < 2:
        raise UsageError("--lambda-steps must be at least 2")
    lams = np.linspace(1.0, 0.0, args.lambda_steps).tolist()
    rows = [r.to_dict() for r in lambda_sweep(_load(args), lams)]
    if args.format == "csv":
        return uio.to_csv(rows, SWEEP_COLUMNS)
    return uio.dumps({"columns": list(SWEEP_COLUMNS), "rows": rows})


def cmd_grid(args) -> str:
    scan = dichotomic_grid_scan(args.resolution)
    rows = [p._asdict() for p in scan.points]
    if args.format == "csv":
        return uio.to_csv(rows, GRID_COLUMNS)
    return uio.dumps(
        {
            "resolution": scan.resolution,
            "min_sigma_min": scan.min_sigma_min,
            "min_sigma_min_prime": scan.min_sigma_min_prime,
            "argmin_sigma_min": list(scan.argmin_sigma_min),
            "argmin_sigma_min_prime": list(scan.argmin_sigma_min_prime),
            "seam_max_gap": scan.seam_max_gap,
            "points": rows,
        }
    )


def cmd_simulate(args) -> str:
    povm = _load(args)
    rho = _state(args.state, povm.dim)
    res = sample_sequential(povm, rho, args.instrument, args.shots, args.seed, workers=args.workers)
    return uio.dumps(
        {
            "seed": args.seed,
            "instrument": InstrumentKind(args.instrument).value,
            "state": args.state,
            "shots": res.shots,
            "repeat_count": res.repeat_count,
            "frequency": res.frequency,
            "exact": repeat_probability_exact(povm, rho, args.instrument),
            "joint_counts": res.joint.tolist(),
        }
    )


def cmd_estimate(args) -> str:
    povm = _load(args)
    fn = estimate_qubit_e_matrix if args.instrument == "luder" else estimate_qubit_x_matrix
    return uio.dumps(fn(povm, args.shots, args.seed, workers=args.workers).to_dict())


def cmd_scan(args) -> str:
    report = conjecture_scan(args.n_values, args.trials, args.seed, d=args.d, workers=args.workers)
    return uio.dumps(report.to_dict())


def _n_values(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("outcome counts must be positive")
    return vals


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _resolution(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"resolution must be at least 2, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unsharp", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="POVM JSON file")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    def seeded(p: argparse.ArgumentParser):
        p.add_argument("--seed", type=_seed, required=True)
        p.add_argument("--workers", type=_positive, default=1)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check POVM invariants")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("measures", parents=[common], help="all unsharpness measures")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("fuzzify", parents=[common], help="mix in white noise")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_fuzzify)

    p = sub.add_parser("sweep", parents=[common], help="measures along a lambda grid from 1 to 0")
    p.add_argument("--lambda-steps", type=int, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid", parents=[common], help="dichotomic threshold grid")
    p.add_argument("--resolution", type=_resolution, required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo double measurement")
    seeded(p)
    p.add_argument("--shots", type=_positive, required=True)
    p.add_argument("--instrument", choices=[k.value for k in InstrumentKind], default="luder")
    p.add_argument(
        "--state", default="mixed",
        help=f"'mixed', a qubit probe ({', '.join(PROBE_LABELS)}) or a state JSON file",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", parents=[common], help="six-probe qubit estimation")
    seeded(p)
    p.add_argument("--shots", type=_positive, required=True, help="shots per probe")
    p.add_argument("--instrument", choices=[k.value for k in InstrumentKind], default="luder")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("scan", parents=[common], help="random search for noise-monotonicity violations")
    seeded(p)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--n-values", type=_n_values, default=[2, 3, 4])
    p.add_argument("--d", type=_positive, default=2)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.format == "csv" and args.command not in CSV_COMMANDS:
            raise UsageError(f"{args.command} has no CSV output")
        text = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except uio.FormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidPovmError, InvalidStateError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _emit(text, args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Four subcommands: `calibrate` finds a decision limit for a target
in-control ARL, `ced` estimates the conditional expected delay of one
scenario, `grid` runs the full comparison study to CSV files, and
`monitor` scores a stream of observations line by line.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 input-data errors
were encountered while monitoring. All command output is a pure function
of flags, config, input data and seed; manifests (which carry a timestamp)
go to files, never to stdout.
"""

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, kernels
from .calibrate import CalibrationSpec, calibrate_h
from .charts import (
    ChartConfig,
    NIGParams,
    SscState,
    new_state,
    running_stats_update,
    step,
)
from .errors import BracketError, DegenerateHistoryError, EstimateError
from .experiment import (
    derive_seed,
    emit_figure_data,
    emit_table,
    grid_spec_from_mapping,
    grid_spec_to_mapping,
    run_grid,
)
from .metrics import estimate_ced
from .simulate import ScenarioSpec


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; 2 is reserved for runtime errors here.
    def error(self, message):
        raise UsageError(message)


def _parse_prior(text: str) -> NIGParams:
    if text == "reference":
        return NIGParams.reference()
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("--prior must be 'reference' or 'mu0,lambda,a,b'")
    try:
        mu, lam, a, b = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"could not parse prior {text!r} as four numbers")
    if lam < 0.0 or b < 0.0:
        raise UsageError("prior requires lambda >= 0 and b >= 0")
    return NIGParams(mu, lam, a, b)


def _prior_text(prior) -> str:
    if prior is None:
        return "none"
    if prior == NIGParams.reference():
        return "reference"
    return f"{prior.mu:g},{prior.lam:g},{prior.a:g},{prior.b:g}"


def _chart_from_args(args, h=None) -> ChartConfig:
    prior = None
    if args.chart == "prc":
        prior = _parse_prior(args.prior)
    try:
        return ChartConfig(args.chart, k=args.k, h=h, prior=prior, side=args.side)
    except ValueError as exc:
        raise UsageError(str(exc))


def _write_manifest(path, command, config):
    manifest = {
        "command": command,
        "version": __version__,
        "backend": kernels.BACKEND,
        "master_seed": config.get("master_seed"),
        "config": config,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _emit(record: dict):
    sys.stdout.write(json.dumps(record) + "\n")


def cmd_calibrate(args) -> int:
    if args.target_arl <= 1.0:
        raise UsageError("--target-arl must exceed 1")
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    chart = _chart_from_args(args)
    spec = CalibrationSpec(
        chart=chart,
        target_arl=args.target_arl,
        reps=args.reps,
        master_seed=args.seed,
        bracket=tuple(args.bracket),
        tol_arl=args.tol,
        cap=args.cap,
    )
    result = calibrate_h(spec)
    config = {
        "chart": args.chart,
        "k": args.k,
        "prior": _prior_text(chart.prior),
        "side": args.side,
        "target_arl": args.target_arl,
        "reps": args.reps,
        "master_seed": args.seed,
        "tol": args.tol,
        "cap": args.cap,
        "bracket": list(args.bracket),
    }
    if args.manifest:
        _write_manifest(args.manifest, "calibrate", config)
    _emit(
        {
            "h": result.h,
            "arl": result.achieved_arl.mean,
            "arl_se": result.achieved_arl.std_error,
            "arl_censored": result.achieved_arl.censored,
            "iterations": result.iterations,
            "converged": result.converged,
            "target_arl": args.target_arl,
            "reps": args.reps,
            "seed": args.seed,
            "backend": kernels.BACKEND,
        }
    )
    return 0 if result.converged else 2


def cmd_ced(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if args.tau < 1:
        raise UsageError("--tau must be >= 1")
    if not math.isfinite(args.delta):
        raise UsageError("--delta must be finite")
    if (args.h is None) == (not args.auto_calibrate):
        raise UsageError("give exactly one of --h or --auto-calibrate")
    chart = _chart_from_args(args)
    h = args.h
    if args.auto_calibrate:
        cal_seed = derive_seed(args.seed, "cli-auto-cal", args.chart, repr(args.k))
        cal = calibrate_h(
            CalibrationSpec(
                chart=chart,
                target_arl=args.target_arl,
                reps=args.reps,
                master_seed=cal_seed,
                tol_arl=args.tol,
                cap=args.cap,
            )
        )
        h = cal.h
    try:
        scenario = ScenarioSpec(
            chart=chart,
            delta=args.delta,
            tau=args.tau,
            reps=args.reps,
            master_seed=args.seed,
            cap=args.cap,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    est = estimate_ced(scenario, h)
    config = {
        "chart": args.chart,
        "k": args.k,
        "prior": _prior_text(chart.prior),
        "side": args.side,
        "h": h,
        "delta": args.delta,
        "tau": args.tau,
        "reps": args.reps,
        "master_seed": args.seed,
        "cap": args.cap,
    }
    if args.manifest:
        _write_manifest(args.manifest, "ced", config)
    _emit(
        {
            "ced": est.ced,
            "std_error": est.std_error,
            "reps": est.reps,
            "early_alarms": est.early_alarms,
            "censored": est.censored,
            "h": h,
            "delta": args.delta,
            "tau": args.tau,
            "seed": args.seed,
            "backend": kernels.BACKEND,
        }
    )
    return 0


def cmd_grid(args) -> int:
    data = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed config {args.config}: {exc}")
        if isinstance(data, dict) and "config" in data and "command" in data:
            data = data["config"]  # accept a manifest written by a previous run
    try:
        spec = grid_spec_from_mapping(data)
        if args.seed is not None:
            spec = grid_spec_from_mapping({**grid_spec_to_mapping(spec), "master_seed": args.seed})
    except ValueError as exc:
        raise UsageError(str(exc))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    progress = (lambda msg: print(msg, file=sys.stderr)) if not args.quiet else None
    result = run_grid(spec, workers=args.workers, progress=progress)

    table_path = out_dir / "table.csv"
    figure_path = out_dir / "figure.csv"
    table_path.write_text(emit_table(result, "csv"), encoding="utf-8")
    figure_path.write_text(emit_figure_data(result), encoding="utf-8")
    _write_manifest(out_dir / "manifest.json", "grid", grid_spec_to_mapping(spec))
    if args.pretty:
        (out_dir / "table.txt").write_text(emit_table(result, "pretty"), encoding="utf-8")

    _emit(
        {
            "rows": len(result.rows),
            "failures": list(result.failures),
            "out_dir": str(out_dir),
            "table": table_path.name,
            "figure": figure_path.name,
            "backend": kernels.BACKEND,
        }
    )
    return 0 if not result.failures else 2


def cmd_monitor(args) -> int:
    chart = _chart_from_args(args, h=args.h)
    state = new_state(chart)
    data_errors = 0
    if args.input:
        try:
            lines = Path(args.input).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return 2
    else:
        lines = (line.rstrip("\n") for line in sys.stdin)

    index = 0
    for line in lines:
        text = line.strip()
        if not text:
            continue
        index += 1
        try:
            x = float(text)
        except ValueError:
            data_errors += 1
            _emit({"index": index, "error": "non-numeric observation", "line": text})
            continue
        try:
            state, res = step(state, x, chart)
        except DegenerateHistoryError:
            data_errors += 1
            _emit({"index": index, "error": "degenerate history (all prior values identical)"})
            # absorb the observation anyway so a later distinct value can restart scoring
            state = SscState(running_stats_update(state.stats, x), state.cusum)
            continue
        _emit(
            {
                "index": index,
                "x": x,
                "increment": res.increment,
                "upper": state.cusum.upper,
                "lower": state.cusum.lower,
                "statistic": res.statistic,
                "warmup": res.warmup,
                "alarm": res.alarm,
            }
        )
        if res.alarm and not args.no_stop:
            break
    return 3 if data_errors else 0


def _add_chart_flags(p):
    p.add_argument("--chart", required=True, choices=("ssc", "prc"), help="chart variant")
    p.add_argument("--k", required=True, type=float, help="reference value")
    p.add_argument(
        "--prior",
        default="reference",
        help="PRC prior: 'reference' or 'mu0,lambda,a,b' (ignored for ssc)",
    )
    p.add_argument(
        "--side", default="two_sided", choices=("upper", "lower", "two_sided")
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="sscusum", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sscusum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="find h for a target in-control ARL")
    _add_chart_flags(p)
    p.add_argument("--target-arl", type=float, default=370.0)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=2.0)
    p.add_argument("--cap", type=int, default=10000)
    p.add_argument("--bracket", type=float, nargs=2, default=(0.1, 20.0))
    p.add_argument("--manifest", help="also write a reproduction manifest to this path")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("ced", help="estimate the conditional expected delay of one scenario")
    _add_chart_flags(p)
    p.add_argument("--h", type=float, default=None, help="decision limit")
    p.add_argument(
        "--auto-calibrate",
        action="store_true",
        help="calibrate h to --target-arl first instead of passing --h",
    )
    p.add_argument("--delta", required=True, type=float)
    p.add_argument("--tau", required=True, type=int)
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=10000)
    p.add_argument("--target-arl", type=float, default=370.0)
    p.add_argument("--tol", type=float, default=2.0)
    p.add_argument("--manifest", help="also write a reproduction manifest to this path")
    p.set_defaults(func=cmd_ced)

    p = sub.add_parser("grid", help="run the full comparison study to CSV files")
    p.add_argument("--config", help="JSON grid config (or a manifest from a previous run)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the config master seed")
    p.add_argument("--pretty", action="store_true", help="also write a human-readable table.txt")
    p.add_argument("--quiet", action="store_true", help="suppress progress output on stderr")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("monitor", help="score observations line by line (stdin or --input)")
    _add_chart_flags(p)
    p.add_argument("--h", required=True, type=float)
    p.add_argument("--input", help="read observations from this file instead of stdin")
    p.add_argument("--no-stop", action="store_true", help="keep monitoring after an alarm")
    p.set_defaults(func=cmd_monitor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (BracketError, EstimateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

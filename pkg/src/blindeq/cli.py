"""
Command-line interface.

Subcommands
-----------
run      one experiment; writes curve, constellation and weight CSVs
compare  all five algorithms on one channel; writes the comparison table
eigen    eigenvalue spread of the channel output

Exit statuses
-------------
0  success
2  bad flags or invalid input (argparse usage errors included)
3  an equalizer diverged
4  output files could not be written
"""

import argparse
import math
import os
import sys
import tempfile

from .adaptive_eq import Algorithm
from .channel import channel_filter, eigen_spread_2, make_channel_h1, make_channel_h2
from .errors import DegenerateSignalError, DivergenceError, InvalidInputError
from .sim_harness import (
    ExperimentConfig,
    compare_algorithms,
    convergence_metrics,
    run_experiment,
    transmitted_symbols,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_IO = 4

ALGO_CHOICES = [a.value for a in Algorithm]


def fmt(v) -> str:
    """17 significant digits: round-trips every double exactly."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def write_csv_atomic(path: str, header, rows) -> None:
    """Write a CSV to a temp file in the target directory, then rename it."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_bundle(files: dict) -> None:
    """Write several CSVs; on failure none of them is left behind."""
    written = []
    try:
        for path, (header, rows) in files.items():
            write_csv_atomic(path, header, rows)
            written.append(path)
    except BaseException:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise


def curve_rows(rec):
    aligned = rec.aligned_err_sq
    for i in range(rec.err_sq.size):
        row = [str(i), fmt(rec.err_sq[i]), fmt(rec.err_db_smoothed[i])]
        if aligned is not None:
            row.append(fmt(aligned[i]))
        yield row


def complex_rows(values):
    for i, z in enumerate(values):
        yield [str(i), fmt(z.real), fmt(z.imag)]


def run_bundle(rec, prefix: str) -> dict:
    curve_header = ["iteration", "err_sq", "err_db_smoothed"]
    if rec.aligned_err_sq is not None:
        curve_header.append("aligned_err_sq")
    const_header = ["index", "re", "im"]
    return {
        f"{prefix}_curve.csv": (curve_header, list(curve_rows(rec))),
        f"{prefix}_const_tx.csv": (const_header, list(complex_rows(rec.transmitted))),
        f"{prefix}_const_rx.csv": (const_header, list(complex_rows(rec.received))),
        f"{prefix}_const_eq.csv": (const_header, list(complex_rows(rec.equalized))),
        f"{prefix}_weights.csv": (["tap_index", "re", "im"], list(complex_rows(rec.final_weights))),
    }


def table_bundle(table, prefix: str) -> dict:
    rows = [
        [r.algorithm.value, fmt(r.steady_state_db), str(r.conv_iteration), str(r.diverged).lower()]
        for r in table.rows
    ]
    return {f"{prefix}_table.csv": (["algorithm", "steady_state_db", "conv_iteration", "diverged"], rows)}


def _config(args, algorithm) -> ExperimentConfig:
    return ExperimentConfig(
        channel=args.channel,
        algorithm=algorithm,
        n_symbols=args.symbols,
        eq_length=getattr(args, "eq_len", None),
        step=getattr(args, "step", None),
        noise_variance=args.noise_var,
        seed=args.seed,
        train_delay=args.train_delay,
        smoothing_window=args.window,
    )


def cmd_run(args) -> int:
    rec = run_experiment(_config(args, args.algo))
    m = convergence_metrics(rec)
    write_bundle(run_bundle(rec, args.out))
    print(f"steady_state_db={fmt(m.steady_state_db)}")
    print(f"conv_iteration={m.conv_iteration}")
    if rec.alignment is not None:
        print(f"align_delay={rec.alignment.delay}")
        ph = rec.alignment.phase
        print(f"align_phase={fmt(ph.real)}{'+' if ph.imag >= 0 else '-'}{fmt(abs(ph.imag))}j")
    return EXIT_OK


def cmd_compare(args) -> int:
    table = compare_algorithms(_config(args, Algorithm.LMS))
    write_bundle(table_bundle(table, args.out))
    print(table.to_text())
    return EXIT_OK


def cmd_eigen(args) -> int:
    if args.symbols < 1:
        raise InvalidInputError("--symbols must be positive")
    chan = make_channel_h1() if args.channel == "h1" else make_channel_h2()
    x = channel_filter(chan, transmitted_symbols(args.symbols, args.seed))
    es = eigen_spread_2(x)
    print(f"lambda_max={fmt(es.lambda_max)}")
    print(f"lambda_min={fmt(es.lambda_min)}")
    print(f"ratio={fmt(es.ratio)}")
    return EXIT_OK


def _add_common(p, *, experiment=True):
    p.add_argument("--channel", required=True, choices=["h1", "h2"])
    p.add_argument("--symbols", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    if experiment:
        p.add_argument("--noise-var", type=float, default=1e-6)
        p.add_argument("--train-delay", type=int, default=0, help="LMS training delay")
        p.add_argument("--window", type=int, default=200, help="smoothing window")
        p.add_argument("--out", default="./out", help="output file prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindeq", description="LMS and CMA(p,q) equalization experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment")
    _add_common(p)
    p.add_argument("--algo", required=True, choices=ALGO_CHOICES)
    p.add_argument("--eq-len", type=int, default=None, help="default: 8 for lms, 2 for cma*")
    p.add_argument("--step", type=float, default=None, help="default: 0.007 for lms, 0.001 for cma*")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="compare all five algorithms")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("eigen", help="eigenvalue spread of the channel output")
    _add_common(p, experiment=False)
    p.set_defaults(func=cmd_eigen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, DegenerateSignalError) as exc:
        print(f"blindeq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"blindeq {args.command}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"blindeq {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

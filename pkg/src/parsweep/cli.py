"""Command-line front end: ``solve``, ``poisson`` and ``bench``."""

import argparse
import csv
import io
import statistics
import sys
import time

import numpy as np

from .core import dense_oracle_solve, format_values, random_dominant, read_matrix
from .dichotomy import DichotomySolver, parse_partition, read_rhs, write_rows
from .errors import FormatError, SweepError
from .poisson import ADISolver, FourierSolver, model_problem
from .runtime import Decomposition, decompose, default_workers, make_engine, run_batch

EXIT_PARSE, EXIT_SOLVER, EXIT_VERIFY = 2, 3, 4
VERIFY_TOL = 1e-9
CSV_COLUMNS = ("size", "np", "t_avr", "s_avr", "method")


class CLIError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def verify_solutions(A, F, X, tol=VERIFY_TOL):
    """Largest relative max-norm deviation from the dense oracle, and pass flag."""
    ref = dense_oracle_solve(A, np.atleast_2d(F).T).T
    scale = max(float(np.max(np.abs(ref))), np.finfo(float).tiny)
    err = float(np.max(np.abs(np.atleast_2d(X) - ref))) / scale
    return err, err <= tol


# -- solve -------------------------------------------------------------------


def cmd_solve(args, out):
    try:
        A = read_matrix(args.matrix)
        F = read_rhs(args.rhs)
        if F.shape[1] != A.n:
            raise FormatError(f"RHS length {F.shape[1]} does not match matrix order {A.n}", 1, args.rhs)
        if args.partition is not None:
            dec = None
            part = parse_partition(args.partition, A.n)
        else:
            dec = decompose(A.n, max(1, min(args.pes, A.n // 2)))
            part = dec.partition()
    except FormatError as exc:
        raise CLIError(EXIT_PARSE, str(exc)) from None
    except OSError as exc:
        raise CLIError(EXIT_PARSE, str(exc)) from None
    try:
        solver = DichotomySolver(A, part)
        dec = dec or Decomposition(A.n, tuple(part.segments()))
        X, stats = run_batch(args.mode, A, dec, F, workers=args.workers, solver=solver)
    except SweepError as exc:
        raise CLIError(EXIT_SOLVER, f"solver error: {exc}") from None
    if args.out:
        write_rows(args.out, X)
    else:
        buf = io.StringIO()
        _write_rows_stream(buf, X)
        out.write(buf.getvalue())
    stats_json = stats.to_json()
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(stats_json + "\n")
    elif args.out:
        out.write(stats_json + "\n")
    else:
        sys.stderr.write(stats_json + "\n")
    if args.verify:
        err, ok = verify_solutions(A, F, X)
        if not ok:
            raise CLIError(EXIT_VERIFY, f"verification failed: relative error {err:.3e} > {VERIFY_TOL:g}")
    return 0


def _write_rows_stream(fh, X):
    fh.write(f"{X.shape[1]} {X.shape[0]}\n")
    for row in X:
        fh.write(format_values(row) + "\n")


# -- poisson -----------------------------------------------------------------


def run_poisson(method, n, eps, series, workers, mode="threaded", solver=None):
    """Solve ``series`` copies of the model problem.

    Returns ``(max error vs exact, iterations or None, seconds per problem)``.
    The solver (and its preliminary phase) is built outside the timed region.
    """
    f, exact = model_problem(n, n)
    engine = make_engine(mode, workers)
    fft_workers = workers if mode == "threaded" else 1
    try:
        if method == "fourier":
            solver = solver or FourierSolver(n, n, pes=workers)
            t0 = time.perf_counter()
            us = solver.solve_series([f] * series, engine, fft_workers)
            elapsed = time.perf_counter() - t0
            iters = None
        elif method == "adi":
            solver = solver or ADISolver(n, n, eps, pes=workers)
            t0 = time.perf_counter()
            us, iters = [], 0
            for _ in range(series):
                u, iters = solver.solve(f, engine=engine)
                us.append(u)
            elapsed = time.perf_counter() - t0
        else:
            raise ValueError(f"unknown method {method!r}")
    finally:
        engine.close()
    err = max(float(np.max(np.abs(u.values - exact.values))) for u in us)
    return err, iters, elapsed / series


def cmd_poisson(args, out):
    try:
        err, iters, t_avr = run_poisson(args.method, args.n, args.eps, args.series, args.workers, args.mode)
    except SweepError as exc:
        raise CLIError(EXIT_SOLVER, f"solver error: {exc}") from None
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("method", "n", "series", "error", "iterations", "t_avr"))
    w.writerow((args.method, args.n, args.series, f"{err:.6e}", "" if iters is None else iters, f"{t_avr:.6e}"))
    return 0


# -- bench -------------------------------------------------------------------


def _time_cell(method, size, np_, series, reps, mode, seed, eps):
    """Median over ``reps`` of the mean per-problem time."""
    times = []
    if method == "sweep":
        rng = np.random.default_rng(seed)
        A = random_dominant(size, rng)
        F = rng.standard_normal((series, size))
        dec = decompose(size, max(1, min(np_, size // 2)))
        solver = DichotomySolver(A, dec.partition())
        for _ in range(reps):
            _, stats = run_batch(mode, A, dec, F, workers=np_, solver=solver)
            times.append(stats.wall_time / series)
    else:
        if method == "fourier":
            solver = FourierSolver(size, size, pes=np_)
        else:
            solver = ADISolver(size, size, eps, pes=np_)
        for _ in range(reps):
            _, _, t = run_poisson(method, size, eps, series, np_, mode, solver=solver)
            times.append(t)
    return statistics.median(times)


def bench_records(method, sizes, nps, series, reps=3, mode="threaded", seed=0, eps=1e-5):
    """Yield ``(size, np, t_avr, s_avr, method)`` rows; np=1 is the baseline."""
    nps = [1] + [k for k in nps if k != 1]
    for size in sizes:
        t1 = None
        for np_ in nps:
            t = _time_cell(method, size, np_, series, reps, mode, seed, eps)
            if np_ == 1:
                t1 = t
                s = 1.0
            else:
                s = t1 / t
            yield (size, np_, t, s, method)


def read_bench_csv(text):
    """Parse bench CSV back into typed rows (stops at an ERROR sentinel)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise FormatError(f"unexpected header {header}", 1)
    rows = []
    for k, row in enumerate(reader, 2):
        if row and row[0] == "ERROR":
            break
        if len(row) != len(CSV_COLUMNS):
            raise FormatError(f"expected {len(CSV_COLUMNS)} fields", k)
        rows.append((int(row[0]), int(row[1]), float(row[2]), float(row[3]), row[4]))
    return rows


def markdown_table(rows):
    lines = ["| size | np | t_avr (s) | s_avr | method |", "|---:|---:|---:|---:|:---|"]
    for size, np_, t, s, m in rows:
        lines.append(f"| {size} | {np_} | {t:.3e} | {s:.2f} | {m} |")
    return "\n".join(lines) + "\n"


def cmd_bench(args, out):
    try:
        sizes = [int(s) for s in args.sizes.split(",")]
        nps = [int(s) for s in args.np.split(",")]
    except ValueError:
        raise CLIError(EXIT_PARSE, "sizes and np must be comma-separated integers") from None
    if not sizes or not nps:
        raise CLIError(EXIT_PARSE, "sizes and np lists must be nonempty")
    if args.series < 10:
        raise CLIError(EXIT_PARSE, "series must be >= 10 for stable timing")
    fh = open(args.out, "w", newline="") if args.out else out
    rows = []
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        try:
            for row in bench_records(args.method, sizes, nps, args.series, args.reps, args.mode, args.seed, args.eps):
                rows.append(row)
                w.writerow((row[0], row[1], f"{row[2]:.6e}", f"{row[3]:.6f}", row[4]))
                fh.flush()
        except (SweepError, ValueError) as exc:
            w.writerow(("ERROR", "", "", "", args.method))
            fh.flush()
            raise CLIError(EXIT_SOLVER, f"benchmark failed: {exc}") from None
    finally:
        if args.out:
            fh.close()
    if args.markdown:
        out.write(markdown_table(rows))
    return 0


# -- entry point ---------------------------------------------------------------


def _common(defaults):
    p = argparse.ArgumentParser(add_help=False)
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--workers", type=int, **({"default": None} if defaults else kw), help="worker threads (SWEEP_WORKERS)")
    p.add_argument("--mode", choices=("simulated", "threaded"), **({"default": "threaded"} if defaults else kw))
    p.add_argument("--seed", type=int, **({"default": 0} if defaults else kw), help="seed for generated fixtures")
    p.add_argument("--verify", action="store_true", **({"default": False} if defaults else kw))
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="parsweep", parents=[_common(True)], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(False)

    s = sub.add_parser("solve", parents=[common], help="solve a batch of systems from files")
    s.add_argument("matrix")
    s.add_argument("rhs")
    s.add_argument("--partition", help="comma-separated boundary rows (1-based)")
    s.add_argument("--pes", type=int, default=4, help="logical PEs when no partition is given")
    s.add_argument("--out", help="solutions file (default: stdout)")
    s.add_argument("--stats", help="RunStats JSON file")

    p = sub.add_parser("poisson", parents=[common], help="solve the model Poisson problem")
    p.add_argument("--method", choices=("fourier", "adi"), default="fourier")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--series", type=int, default=1)

    b = sub.add_parser("bench", parents=[common], help="time a method over sizes and worker counts")
    b.add_argument("--method", choices=("fourier", "adi", "sweep"), default="fourier")
    b.add_argument("--sizes", default="64,128")
    b.add_argument("--np", default="1,2,4", help="worker counts")
    b.add_argument("--series", type=int, default=100)
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--eps", type=float, default=1e-5)
    b.add_argument("--markdown", action="store_true")
    b.add_argument("--out", help="CSV file (default: stdout)")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.workers is None:
        args.workers = default_workers()
    handler = {"solve": cmd_solve, "poisson": cmd_poisson, "bench": cmd_bench}[args.command]
    try:
        return handler(args, out)
    except CLIError as exc:
        sys.stderr.write(f"parsweep: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

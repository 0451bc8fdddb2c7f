"""Logical processing elements and the engines that execute solver phases."""

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .dichotomy import DichotomySolver, Partition
from .errors import TooManyPEs, WorkerPanic


@dataclass(frozen=True)
class Decomposition:
    """Contiguous 1-based index ranges, one per PE."""

    n: int
    ranges: tuple

    @property
    def p(self):
        return len(self.ranges)

    def partition(self):
        return Partition(self.n, tuple(hi for _, hi in self.ranges[:-1]))

    def owner(self, index):
        for pe, (lo, hi) in enumerate(self.ranges):
            if lo <= index <= hi:
                return pe
        raise IndexError(index)


def decompose(n, p):
    """Split ``1..n`` into ``p`` near-equal ranges of at least two rows each."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if n < 2 * p:
        raise TooManyPEs(f"{p} PEs need at least {2 * p} rows, got {n}")
    base, extra = divmod(n, p)
    ranges, lo = [], 1
    for k in range(p):
        size = base + (1 if k < extra else 0)
        ranges.append((lo, lo + size - 1))
        lo += size
    return Decomposition(n, tuple(ranges))


@dataclass
class RunStats:
    comm_rounds: int = 0
    combine_terms: int = 0
    local_flops: int = 0
    wall_time: float = 0.0

    def to_json(self):
        return json.dumps(asdict(self))


def default_workers():
    env = os.environ.get("SWEEP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class SimulatedEngine:
    """Executes each phase's tasks one after another, in index order."""

    def __init__(self):
        self.rounds = 0

    def run_phase(self, name, tasks):
        self.rounds += 1
        for pe, fn in tasks:
            try:
                fn()
            except Exception as exc:
                raise WorkerPanic(pe, name, exc) from exc

    def close(self):
        pass


class ThreadedEngine:
    """Thread pool; every phase is a barrier, tasks within it are unordered."""

    def __init__(self, workers=None):
        self.workers = workers or default_workers()
        self.rounds = 0
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None
        self._lock = threading.Lock()

    def run_phase(self, name, tasks):
        with self._lock:
            self.rounds += 1
        if self._pool is None:
            for pe, fn in tasks:
                try:
                    fn()
                except Exception as exc:
                    raise WorkerPanic(pe, name, exc) from exc
            return
        futures = [(pe, self._pool.submit(fn)) for pe, fn in tasks]
        failure = None
        for pe, fut in futures:
            exc = fut.exception()
            if exc is not None and failure is None:
                failure = WorkerPanic(pe, name, exc)
        if failure is not None:
            raise failure from failure.cause

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def make_engine(mode="simulated", workers=None):
    if mode == "simulated":
        return SimulatedEngine()
    if mode == "threaded":
        return ThreadedEngine(workers)
    raise ValueError(f"unknown mode {mode!r}")


def run_batch(mode, A, decomposition, F_series, workers=None, solver=None):
    """Solve every row of ``F_series`` under an execution mode.

    Returns ``(solutions, RunStats)``; solutions have the shape of
    ``F_series`` (``(N, n)``).  A prebuilt ``solver`` skips the preliminary
    phase.
    """
    F = np.atleast_2d(np.asarray(F_series, dtype=np.float64))
    if decomposition.n != A.n:
        raise ValueError("decomposition does not match the matrix order")
    t0 = time.perf_counter()
    if solver is None:
        solver = DichotomySolver(A, decomposition.partition())
    engine = make_engine(mode, workers)
    try:
        x = solver.solve(F.T, engine)
    finally:
        engine.close()
    stats = RunStats(
        comm_rounds=engine.rounds,
        combine_terms=solver.prelim.combine_terms,
        local_flops=solver.flops(F.shape[0]),
        wall_time=time.perf_counter() - t0,
    )
    return x.T, stats

import json
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rel_err
from parsweep.core import TridiagMatrix, dense_oracle_solve, random_dominant
from parsweep.errors import TooManyPEs, WorkerPanic
from parsweep.runtime import (
    RunStats,
    SimulatedEngine,
    ThreadedEngine,
    decompose,
    default_workers,
    make_engine,
    run_batch,
)


def test_decompose_examples():
    d = decompose(16, 4)
    assert d.ranges == ((1, 4), (5, 8), (9, 12), (13, 16))
    assert d.partition().boundaries == (4, 8, 12)
    d = decompose(9, 1)
    assert d.ranges == ((1, 9),) and d.partition().p == 0
    assert [hi - lo + 1 for lo, hi in decompose(7, 3).ranges] == [3, 2, 2]
    assert decompose(16, 4).owner(5) == 1
    with pytest.raises(TooManyPEs):
        decompose(7, 4)


@given(n=st.integers(2, 5000), p=st.integers(1, 300))
def test_decompose_tiles(n, p):
    if n < 2 * p:
        with pytest.raises(TooManyPEs):
            decompose(n, p)
        return
    d = decompose(n, p)
    sizes = [hi - lo + 1 for lo, hi in d.ranges]
    assert d.ranges[0][0] == 1 and d.ranges[-1][1] == n
    assert all(d.ranges[k][1] + 1 == d.ranges[k + 1][0] for k in range(p - 1))
    assert min(sizes) >= 2 and max(sizes) - min(sizes) <= 1


def test_comm_rounds(rng):
    A = random_dominant(1024, rng)
    f = rng.normal(size=(1, 1024))
    rounds = {}
    for p in (1, 2, 16, 256):
        _, stats = run_batch("simulated", A, decompose(1024, p), f)
        rounds[p - 1] = stats.comm_rounds
        assert stats.comm_rounds <= int(np.ceil(np.log2(p))) + 2
    assert rounds[15] <= 6
    assert rounds[255] - rounds[15] <= 4


def test_modes_bitwise_equal(rng):
    A = random_dominant(700, rng)
    d = decompose(700, 20)
    F = rng.normal(size=(9, 700))
    x_sim, s_sim = run_batch("simulated", A, d, F)
    for w in (1, 2, 5):
        x_thr, s_thr = run_batch("threaded", A, d, F, workers=w)
        np.testing.assert_array_equal(x_thr, x_sim)
        assert s_thr.comm_rounds == s_sim.comm_rounds
    assert rel_err(x_sim, dense_oracle_solve(A, F.T).T) <= 1e-9


def test_simulated_runs_deterministic(rng):
    A = random_dominant(300, rng)
    d = decompose(300, 8)
    F = rng.normal(size=(4, 300))
    x1, s1 = run_batch("simulated", A, d, F)
    x2, s2 = run_batch("simulated", A, d, F)
    np.testing.assert_array_equal(x1, x2)
    assert (s1.comm_rounds, s1.combine_terms, s1.local_flops) == (s2.comm_rounds, s2.combine_terms, s2.local_flops)


def test_run_stats_json():
    s = RunStats(3, 10, 400, 0.5)
    assert json.loads(s.to_json()) == {"comm_rounds": 3, "combine_terms": 10, "local_flops": 400, "wall_time": 0.5}


def test_run_batch_rejects_mismatched_decomposition(rng):
    with pytest.raises(ValueError):
        run_batch("simulated", random_dominant(10, rng), decompose(12, 2), np.ones((1, 10)))
    with pytest.raises(ValueError):
        make_engine("mpi")


@pytest.mark.parametrize("engine", [SimulatedEngine(), ThreadedEngine(1), ThreadedEngine(3)])
def test_worker_panic_names_pe(engine):
    def boom():
        raise ZeroDivisionError("x")

    with pytest.raises(WorkerPanic) as info:
        engine.run_phase("level 2", [(0, lambda: None), (7, boom)])
    assert info.value.pe == 7 and info.value.phase == "level 2"
    assert isinstance(info.value.cause, ZeroDivisionError)
    engine.close()


def test_solver_failure_surfaces_as_worker_panic(rng, monkeypatch):
    import parsweep.dichotomy as dich

    A = random_dominant(40, rng)

    def broken(pre, s, *args):
        raise FloatingPointError(f"segment {s}")

    monkeypatch.setattr(dich, "solve_local", broken)
    for mode in ("simulated", "threaded"):
        with pytest.raises(WorkerPanic) as info:
            run_batch(mode, A, decompose(40, 4), np.ones((1, 40)), workers=2)
        assert info.value.phase == "local" and info.value.pe == 1


def test_workers_env(monkeypatch):
    monkeypatch.setenv("SWEEP_WORKERS", "3")
    assert default_workers() == 3
    assert ThreadedEngine().workers == 3
    monkeypatch.delenv("SWEEP_WORKERS")
    assert default_workers() == (os.cpu_count() or 1)


@pytest.mark.skipif((os.cpu_count() or 1) < 4, reason="needs at least 4 cores")
def test_threaded_faster_than_simulated(rng):
    A = TridiagMatrix.constant(4096, -1, 4, -1)
    d = decompose(4096, 16)
    F = rng.normal(size=(100, 4096))
    _, sim = run_batch("simulated", A, d, F)
    _, thr = run_batch("threaded", A, d, F, workers=4)
    assert thr.wall_time < sim.wall_time

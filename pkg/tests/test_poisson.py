import math

import numpy as np
import pytest

from parsweep.core import check_dominance
from parsweep.errors import FormatError, NonConvergence
from parsweep.poisson import (
    ADISolver,
    FourierSolver,
    Grid2D,
    adi_iteration_bound,
    adi_parameters,
    adi_solve,
    dst1,
    dst1_direct,
    fourier_solve,
    harmonic_system,
    laplacian,
    model_problem,
    read_grid,
    residual,
    write_grid,
)
from parsweep.runtime import SimulatedEngine


def test_grid_shape_checked():
    with pytest.raises(ValueError):
        Grid2D(4, 4, 0.25, 0.25, np.zeros((4, 4)))


def test_model_problem():
    f, exact = model_problem(16, 16)
    v = exact.values
    assert not v[0].any() and not v[-1].any() and not v[:, 0].any() and not v[:, -1].any()
    assert f.values[4, 4] == pytest.approx(8 * np.pi**2, rel=1e-14)
    assert 8 * np.pi**2 == pytest.approx(78.9568, abs=5e-5)


def test_model_problem_truncation_order():
    errs = []
    for N in (16, 32, 64, 128):
        f, exact = model_problem(N, N)
        errs.append(np.max(np.abs(laplacian(exact) + f.interior)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.9) & (ratios < 4.1))


# sine transform -------------------------------------------------------------------


def test_dst_single_mode():
    N = 32
    j = np.arange(1, N)
    for l in (1, 5, 31):
        c = dst1(np.sin(np.pi * l * j / N))
        expect = np.zeros(N - 1)
        expect[l - 1] = 1.0
        assert np.max(np.abs(c - expect)) <= 1e-12


def test_dst_roundtrip_and_direct(rng):
    x = rng.normal(size=63)
    c = dst1(x)
    assert np.max(np.abs(dst1(c, "inverse") - x)) <= 1e-12 * np.max(np.abs(x))
    np.testing.assert_allclose(c, dst1_direct(x), rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(dst1(c, "inverse"), dst1_direct(c, "inverse"), rtol=1e-12, atol=1e-13)
    assert not dst1(np.zeros(63)).any()


def test_dst_along_axis(rng):
    X = rng.normal(size=(5, 15, 3))
    C = dst1(X, axis=1)
    for a in range(5):
        for b in range(3):
            np.testing.assert_allclose(C[a, :, b], dst1_direct(X[a, :, b]), rtol=1e-12, atol=1e-13)
    with pytest.raises(ValueError):
        dst1(X, "sideways")


# Fourier solver ---------------------------------------------------------------------


def test_harmonic_matrices_dominant():
    N1, N2 = 20, 24
    for l in range(1, N2):
        h = harmonic_system(N1, N2, 1 / N1, 1 / N2, l)
        assert h.d_l > 0
        r = check_dominance(h.matrix)
        assert r.dominant and r.strict_somewhere and r.worst_margin > 0


def test_fourier_zero_rhs():
    f = Grid2D.zeros(16, 12)
    assert not fourier_solve(f).values.any()


def test_fourier_discrete_eigenfunction():
    N1, N2, l1, l2 = 24, 16, 1.0, 2.0
    g = Grid2D.zeros(N1, N2, l1, l2)
    k, m = 3, 5
    phi = np.outer(np.sin(np.pi * k * g.x / l1), np.sin(np.pi * m * g.y / l2))
    lam = 4 * math.sin(math.pi * k / (2 * N1)) ** 2 / g.h1**2 + 4 * math.sin(math.pi * m / (2 * N2)) ** 2 / g.h2**2
    f = Grid2D.from_interior(g, phi[1:-1, 1:-1])
    u = FourierSolver(N1, N2, l1, l2, pes=3).solve(f)
    np.testing.assert_allclose(u.interior, phi[1:-1, 1:-1] / lam, atol=1e-13)


def test_fourier_residual(rng):
    for N in (8, 33, 64, 256):
        f = Grid2D.from_interior(Grid2D.zeros(N, N), rng.normal(size=(N - 1, N - 1)))
        u = fourier_solve(f, pes=4)
        assert residual(u, f) <= 1e-9 * f.max_abs()
        assert not u.values[0].any() and not u.values[:, -1].any()


def test_fourier_series_matches_single(rng):
    solver = FourierSolver(32, 20, pes=4)
    fs = [Grid2D.from_interior(Grid2D.zeros(32, 20), rng.normal(size=(31, 19))) for _ in range(5)]
    many = solver.solve_series(fs, chunk=2)
    for f, u in zip(fs, many):
        np.testing.assert_allclose(u.values, solver.solve(f).values, rtol=1e-12, atol=1e-15)
    with pytest.raises(ValueError):
        solver.solve(Grid2D.zeros(16, 20))


def test_fourier_engine_independent():
    f, _ = model_problem(48, 48)
    a = FourierSolver(48, 48, pes=6).solve(f, SimulatedEngine())
    b = FourierSolver(48, 48, pes=6).solve(f)
    np.testing.assert_array_equal(a.values, b.values)


# ADI ------------------------------------------------------------------------------


def test_adi_iteration_bound():
    assert 0.2 * math.log(4 * 512 / math.pi) * math.log(4e5) == pytest.approx(16.72, abs=0.01)
    assert adi_iteration_bound(512, 1e-5) == 17
    assert 0.2 * math.log(4 * 128 / math.pi) * math.log(4e5) == pytest.approx(13.14, abs=0.01)
    assert adi_iteration_bound(128, 1e-5) == 14
    assert adi_iteration_bound(128, 4.0) == 0


def test_adi_parameters():
    N = 64
    h = 1 / N
    lo = 4 / h**2 * math.sin(math.pi / (2 * N)) ** 2
    hi = 4 / h**2 * math.cos(math.pi / (2 * N)) ** 2
    (tau,) = adi_parameters(N, 1)
    assert tau == pytest.approx(1 / math.sqrt(lo * hi), rel=1e-14)
    taus = adi_parameters(N, 9)
    assert np.all(np.diff(taus) > 0)
    assert taus[0] >= 1 / hi and taus[-1] <= 1 / lo


def test_adi_zero_problem():
    f = Grid2D.zeros(16, 16)
    u, its = adi_solve(f, 1e-5)
    assert its == 1 and not u.values.any()


def test_adi_error_drops_every_cycle():
    N = 64
    f, _ = model_problem(N, N)
    exact = fourier_solve(f)
    solver = ADISolver(N, N, 1e-10, n0=4)
    errs = []

    def record(k, U):
        if k % solver.n0 == 0:
            errs.append(np.max(np.abs(U - exact.interior)))

    solver.solve(f, exact=exact, callback=record)
    e0 = exact.max_abs()
    seq = [e0] + errs
    assert len(errs) >= 3
    assert all(b < a for a, b in zip(seq, seq[1:]))


def test_adi_rectangular_and_initial_guess(rng):
    f = Grid2D.from_interior(Grid2D.zeros(40, 24, 1.0, 0.6), rng.normal(size=(39, 23)))
    ref = fourier_solve(f)
    u, _ = ADISolver(40, 24, 1e-10, 1.0, 0.6, pes=3).solve(f)
    assert np.max(np.abs(u.values - ref.values)) <= 1e-8 * ref.max_abs()
    u2, its = ADISolver(40, 24, 1e-10, 1.0, 0.6).solve(f, u0=ref)
    assert its == 1


def test_adi_nonconvergence():
    f, exact = model_problem(16, 16)
    wrong = Grid2D(16, 16, exact.h1, exact.h2, 2 * exact.values)
    solver = ADISolver(16, 16, 1e-5)
    with pytest.raises(NonConvergence) as info:
        solver.solve(f, exact=wrong)
    assert info.value.iterations == 10 * adi_iteration_bound(16, 1e-5)


# grid text format ---------------------------------------------------------------------


def test_grid_roundtrip(tmp_path):
    f, _ = model_problem(7, 5)
    write_grid(tmp_path / "g.txt", f)
    g = read_grid(tmp_path / "g.txt")
    assert (g.N1, g.N2, g.h1, g.h2) == (f.N1, f.N2, f.h1, f.h2)
    np.testing.assert_array_equal(g.values, f.values)


@pytest.mark.parametrize("text", ["", "3 3 0.5\n", "2 2 0.5 0.5\n1 2 3\n4 5 6\n7 8\n", "2 2 0.5 0.5\n1 2 3\n4 z 6\n7 8 9\n"])
def test_grid_errors(tmp_path, text):
    (tmp_path / "g.txt").write_text(text)
    with pytest.raises(FormatError):
        read_grid(tmp_path / "g.txt")

"""2D Dirichlet Poisson solvers built on the batched sweep.

Both solvers discretize ``Laplace(u) = -f`` on a rectangle with the 5-point
operator.  The Fourier solver expands along direction 2 in discrete sine
modes and solves one tridiagonal system per harmonic; the ADI solver runs
Peaceman-Rachford iterations with a cyclic parameter set.  In both cases the
tridiagonal systems come in series with a fixed matrix and are handed to
:class:`~parsweep.dichotomy.DichotomySolver`.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .core import TridiagMatrix, format_values
from .dichotomy import DichotomySolver, Partition
from .errors import FormatError, NonConvergence
from .runtime import decompose


@dataclass
class Grid2D:
    """Node values on the uniform mesh ``(i*h1, j*h2)``, shape ``(N1+1, N2+1)``."""

    N1: int
    N2: int
    h1: float
    h2: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.N1 + 1, self.N2 + 1):
            raise ValueError(f"values must have shape {(self.N1 + 1, self.N2 + 1)}, got {self.values.shape}")

    @classmethod
    def zeros(cls, N1, N2, l1=1.0, l2=1.0):
        return cls(N1, N2, l1 / N1, l2 / N2, np.zeros((N1 + 1, N2 + 1)))

    @classmethod
    def from_interior(cls, like, interior):
        v = np.zeros((like.N1 + 1, like.N2 + 1))
        v[1:-1, 1:-1] = interior
        return cls(like.N1, like.N2, like.h1, like.h2, v)

    @property
    def interior(self):
        return self.values[1:-1, 1:-1]

    @property
    def x(self):
        return np.arange(self.N1 + 1) * self.h1

    @property
    def y(self):
        return np.arange(self.N2 + 1) * self.h2

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


def laplacian(u):
    """5-point ``Lambda u`` on the interior nodes."""
    v = u.values
    d1 = (v[2:, 1:-1] - 2.0 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / u.h1**2
    d2 = (v[1:-1, 2:] - 2.0 * v[1:-1, 1:-1] + v[1:-1, :-2]) / u.h2**2
    return d1 + d2


def residual(u, f):
    """Max-norm interior residual of ``Lambda u = -f``."""
    return float(np.max(np.abs(laplacian(u) + f.interior)))


def model_problem(N1, N2):
    """Right-hand side ``8 pi^2 sin(2 pi x) sin(2 pi y)`` and its exact solution."""
    if N1 < 2 or N2 < 2:
        raise ValueError("mesh needs at least 2 cells per direction")
    g = Grid2D.zeros(N1, N2)
    s = np.outer(np.sin(2 * np.pi * g.x), np.sin(2 * np.pi * g.y))
    s[[0, -1], :] = 0.0
    s[:, [0, -1]] = 0.0
    return (
        Grid2D(N1, N2, g.h1, g.h2, 8 * np.pi**2 * s),
        Grid2D(N1, N2, g.h1, g.h2, s),
    )


# -- sine transform -----------------------------------------------------------


def _sine_sums(x, axis, workers=None):
    """``sum_j x_j sin(pi l j / N)`` for l = 1..N-1 via an odd extension."""
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    m = x.shape[-1]
    N = m + 1
    ext = np.zeros(x.shape[:-1] + (2 * N,))
    ext[..., 1:N] = x
    ext[..., N + 1 :] = -x[..., ::-1]
    Y = scipy.fft.rfft(ext, axis=-1, workers=workers)
    return np.moveaxis(-0.5 * Y.imag[..., 1:N], -1, axis)


def dst1(values, direction="forward", axis=0, workers=None):
    """Sine transform of interior samples ``j = 1..N-1`` along ``axis``.

    ``forward`` returns coefficients ``c_l = (2/N) sum_j x_j sin(pi l j/N)``,
    ``inverse`` evaluates ``x_j = sum_l c_l sin(pi l j/N)``; the pair are
    exact inverses.
    """
    values = np.asarray(values, dtype=np.float64)
    N = values.shape[axis] + 1
    if N < 2:
        raise ValueError("need at least one interior sample")
    s = _sine_sums(values, axis, workers)
    if direction == "forward":
        return s * (2.0 / N)
    if direction == "inverse":
        return s
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dst1_direct(values, direction="forward"):
    """O(N^2) sine transform of a vector, for checking :func:`dst1`."""
    values = np.asarray(values, dtype=np.float64)
    N = values.shape[0] + 1
    j = np.arange(1, N)
    S = np.sin(np.pi * np.outer(j, j) / N)
    out = S @ values
    return out * (2.0 / N) if direction == "forward" else out


# -- Fourier (variable separation) --------------------------------------------


@dataclass(frozen=True)
class HarmonicSystem:
    l: int
    d_l: float
    matrix: TridiagMatrix


def harmonic_shifts(N1, N2, h1, h2):
    l = np.arange(1, N2)
    return 4.0 * (h1**2 / h2**2) * np.sin(np.pi * l / (2 * N2)) ** 2


def harmonic_system(N1, N2, h1, h2, l):
    d = 4.0 * (h1**2 / h2**2) * math.sin(math.pi * l / (2 * N2)) ** 2
    n = N1 - 1
    return HarmonicSystem(l, d, TridiagMatrix.constant(n, 1.0, -2.0 - d, 1.0))


def _partition(n, pes):
    pes = max(1, min(pes, n // 2))
    return decompose(n, pes).partition()


class FourierSolver:
    """Variable-separation solver for a fixed mesh.

    The harmonic matrices ``T - d_l I`` are swept together as lanes of one
    :class:`DichotomySolver`, so the preliminary data for every harmonic is
    built once and reused for every right-hand side.
    """

    def __init__(self, N1, N2, l1=1.0, l2=1.0, pes=1):
        if N1 < 3 or N2 < 2:
            raise ValueError("Fourier solver needs N1 >= 3 and N2 >= 2")
        self.N1, self.N2 = N1, N2
        self.h1, self.h2 = l1 / N1, l2 / N2
        self.shifts = harmonic_shifts(N1, N2, self.h1, self.h2)
        n, L = N1 - 1, N2 - 1
        diag = np.broadcast_to(-2.0 - self.shifts, (n, L))
        ones = np.ones((n - 1, L))
        self.matrix = TridiagMatrix(ones, diag, ones)
        self.solver = DichotomySolver(self.matrix, _partition(n, pes))

    def harmonic(self, l):
        return harmonic_system(self.N1, self.N2, self.h1, self.h2, l)

    def _solve_interior(self, F, engine=None, workers=None):
        # F: (S, N1-1, N2-1) -> harmonics along the last axis
        coeff = dst1(F, "forward", axis=2, workers=workers)
        rhs = np.moveaxis(coeff, 0, -1) * (-self.h1**2)  # (n, L, S)
        amp = self.solver.solve(rhs, engine)
        return dst1(np.moveaxis(amp, -1, 0), "inverse", axis=2, workers=workers)

    def solve(self, f, engine=None, workers=None):
        self._check(f)
        u = self._solve_interior(f.interior[None], engine, workers)[0]
        return Grid2D.from_interior(f, u)

    def solve_series(self, fs, engine=None, workers=None, chunk=None):
        """Solve a series of problems on this mesh, ``chunk`` at a time."""
        fs = list(fs)
        for f in fs:
            self._check(f)
        if chunk is None:
            per = 8 * (self.N1 + 1) * (self.N2 + 1) * 6
            chunk = max(1, (256 << 20) // per)
        out = []
        for k in range(0, len(fs), chunk):
            batch = np.stack([f.interior for f in fs[k : k + chunk]])
            for u in self._solve_interior(batch, engine, workers):
                out.append(Grid2D.from_interior(fs[0], u))
        return out

    def _check(self, f):
        if (f.N1, f.N2) != (self.N1, self.N2) or not (
            math.isclose(f.h1, self.h1) and math.isclose(f.h2, self.h2)
        ):
            raise ValueError("grid does not match the solver mesh")


@lru_cache(maxsize=8)
def _fourier_solver(N1, N2, h1, h2, pes):
    return FourierSolver(N1, N2, N1 * h1, N2 * h2, pes)


def fourier_solve(f, pes=1, engine=None, workers=None):
    """Solve ``Lambda u = -f`` with zero boundary values by sine expansion."""
    return _fourier_solver(f.N1, f.N2, f.h1, f.h2, pes).solve(f, engine, workers)


# -- ADI (Peaceman-Rachford) ---------------------------------------------------


def adi_iteration_bound(N, eps):
    """``ceil(0.2 ln(4N/pi) ln(4/eps))`` iterations for a square mesh."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n0 = 0.2 * math.log(4 * N / math.pi) * math.log(4 / eps)
    return max(0, math.ceil(n0))


def _spectrum(N, length=1.0):
    h = length / N
    lo = 4 / h**2 * math.sin(math.pi / (2 * N)) ** 2
    hi = 4 / h**2 * math.cos(math.pi / (2 * N)) ** 2
    return lo, hi


def adi_parameters(N, n0, length=1.0):
    """Geometric cyclic set ``tau_1 < ... < tau_n0`` spanning the 1D spectrum."""
    if N < 2 or n0 < 1:
        raise ValueError("need N >= 2 and n0 >= 1")
    lo, hi = _spectrum(N, length)
    j = np.arange(1, n0 + 1)
    return 1.0 / (hi * (lo / hi) ** ((2 * j - 1) / (2 * n0)))


class ADISolver:
    """Peaceman-Rachford iteration with one prefactored solver per parameter."""

    def __init__(self, N1, N2, eps, l1=1.0, l2=1.0, pes=1, n0=None):
        if N1 < 3 or N2 < 3:
            raise ValueError("ADI solver needs N1, N2 >= 3")
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.N1, self.N2 = N1, N2
        self.h1, self.h2 = l1 / N1, l2 / N2
        self.eps = eps
        self.bound = adi_iteration_bound(max(N1, N2), eps)
        self.n0 = n0 or max(1, self.bound)
        # one parameter set covering both directions' spectra
        lo = min(_spectrum(N1, l1)[0], _spectrum(N2, l2)[0])
        hi = max(_spectrum(N1, l1)[1], _spectrum(N2, l2)[1])
        j = np.arange(1, self.n0 + 1)
        self.taus = 1.0 / (hi * (lo / hi) ** ((2 * j - 1) / (2 * self.n0)))
        p1, p2 = _partition(N1 - 1, pes), _partition(N2 - 1, pes)
        self.sweeps = [
            (
                DichotomySolver(TridiagMatrix.constant(N1 - 1, 1.0, -2.0 - self.h1**2 / tau, 1.0), p1),
                DichotomySolver(TridiagMatrix.constant(N2 - 1, 1.0, -2.0 - self.h2**2 / tau, 1.0), p2),
            )
            for tau in self.taus
        ]

    def max_iterations(self):
        return 10 * max(1, self.bound)

    def _lap2(self, U):
        P = np.pad(U, ((0, 0), (1, 1)))
        return (P[:, 2:] - 2.0 * U + P[:, :-2]) / self.h2**2

    def _lap1(self, U):
        P = np.pad(U, ((1, 1), (0, 0)))
        return (P[2:, :] - 2.0 * U + P[:-2, :]) / self.h1**2

    def step(self, U, F, k, engine=None):
        """One full iteration with parameter ``k mod n0``."""
        tau = self.taus[k % self.n0]
        s1, s2 = self.sweeps[k % self.n0]
        rhs = -self.h1**2 * (U / tau + self._lap2(U) + F)
        half = s1.solve(rhs, engine)
        rhs = -self.h2**2 * (half / tau + self._lap1(half) + F)
        # transpose so direction 2 becomes the sweep axis
        return s2.solve(np.ascontiguousarray(rhs.T), engine).T

    def solve(self, f, u0=None, exact=None, engine=None, callback=None):
        """Iterate to tolerance; returns ``(u, iterations)``.

        Without ``exact`` the stop test is the relative change between
        iterates.  With ``exact`` it is the error reduction
        ``|u_k - exact| <= eps |u_0 - exact|``.
        """
        F = f.interior
        U = np.zeros_like(F) if u0 is None else np.array(u0.interior)
        E = None if exact is None else exact.interior
        e0 = None if E is None else np.max(np.abs(U - E))
        limit = self.max_iterations()
        change = np.inf
        for k in range(limit):
            V = self.step(U, F, k, engine)
            if E is not None:
                done = np.max(np.abs(V - E)) <= self.eps * e0
                change = float(np.max(np.abs(V - E)))
            else:
                change = float(np.max(np.abs(V - U)))
                size = float(np.max(np.abs(V)))
                done = change <= self.eps * size or (size == 0.0 and change == 0.0)
            U = V
            if callback is not None:
                callback(k + 1, U)
            if done:
                return Grid2D.from_interior(f, U), k + 1
        raise NonConvergence(limit, change)


@lru_cache(maxsize=8)
def _adi_solver(N1, N2, h1, h2, eps, pes):
    return ADISolver(N1, N2, eps, N1 * h1, N2 * h2, pes)


def adi_solve(f, eps, u0=None, exact=None, pes=1, engine=None):
    return _adi_solver(f.N1, f.N2, f.h1, f.h2, eps, pes).solve(f, u0, exact, engine)


# -- grid text format ------------------------------------------------------------


def write_grid(path, g):
    with open(path, "w") as fh:
        fh.write(f"{g.N1} {g.N2} {g.h1!r} {g.h2!r}\n")
        for row in g.values:
            fh.write(format_values(row) + "\n")


def read_grid(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty grid file", 1, path)
    head = lines[0].split()
    try:
        N1, N2 = int(head[0]), int(head[1])
        h1, h2 = float(head[2]), float(head[3])
    except (ValueError, IndexError):
        raise FormatError(f"header must be 'N1 N2 h1 h2', got {lines[0]!r}", 1, path) from None
    vals = []
    for k, line in enumerate(lines[1:], 2):
        try:
            vals.extend(float(t) for t in line.split())
        except ValueError as exc:
            raise FormatError(f"bad number ({exc})", k, path) from None
    if len(vals) != (N1 + 1) * (N2 + 1):
        raise FormatError(f"expected {(N1 + 1) * (N2 + 1)} values, found {len(vals)}", len(lines), path)
    return Grid2D(N1, N2, h1, h2, np.array(vals).reshape(N1 + 1, N2 + 1))

"""Tridiagonal matrices and the sequential sweep.

Row indices in the public API are 1-based, matching the text formats and the
partition notation used throughout the package.  Arrays are plain numpy
arrays and therefore 0-based; ``sub[k]`` is the entry below the diagonal in
row ``k + 2`` (1-based) and ``sup[k]`` the entry above the diagonal in row
``k + 1``.

A :class:`TridiagMatrix` may carry trailing "lane" axes: ``diag`` of shape
``(n, L)`` describes ``L`` independent matrices of order ``n`` that are
swept together.  Everything that does not need a dense representation
accepts lanes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    FormatError,
    NotSymmetrizable,
    OracleFallbackRequired,
    PivotBreakdown,
    Singular,
)

PIVOT_TINY = 1e-300
# magnitude limit for cumulative products in the explicit inverse
PRODUCT_LIMIT = 1e280
# arithmetic per row of a full forward/backward sweep and one right-hand side
FLOPS_PER_ROW = 8


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TridiagMatrix:
    """Three diagonals of a tridiagonal matrix of order ``n``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        sub, diag, sup = (_readonly(x) for x in (self.sub, self.diag, self.sup))
        if diag.ndim == 0:
            raise ValueError("diag must be a sequence")
        n = diag.shape[0]
        if n < 2:
            raise ValueError(f"order must be >= 2, got {n}")
        lanes = diag.shape[1:]
        if sub.shape != (n - 1,) + lanes or sup.shape != (n - 1,) + lanes:
            raise ValueError(
                f"off-diagonals must have shape {(n - 1,) + lanes}, "
                f"got sub {sub.shape} and sup {sup.shape}"
            )
        if not (np.isfinite(sub).all() and np.isfinite(diag).all() and np.isfinite(sup).all()):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sup", sup)

    @classmethod
    def constant(cls, n, sub, diag, sup):
        """``tri(sub, diag, sup)`` of order ``n``."""
        return cls(np.full(n - 1, float(sub)), np.full(n, float(diag)), np.full(n - 1, float(sup)))

    @classmethod
    def from_dense(cls, M):
        M = np.asarray(M, dtype=np.float64)
        return cls(np.diag(M, -1), np.diag(M), np.diag(M, 1))

    @property
    def n(self):
        return self.diag.shape[0]

    @property
    def lanes(self):
        return self.diag.shape[1:]

    def is_symmetric(self, rtol=0.0):
        scale = np.maximum(np.abs(self.sub), np.abs(self.sup))
        return bool(np.all(np.abs(self.sub - self.sup) <= rtol * scale))

    def transpose(self):
        return TridiagMatrix(self.sup, self.diag, self.sub)

    def to_dense(self):
        if self.lanes:
            raise ValueError("dense form is only defined for a single matrix")
        n = self.n
        M = np.zeros((n, n))
        idx = np.arange(n)
        M[idx, idx] = self.diag
        M[idx[1:], idx[:-1]] = self.sub
        M[idx[:-1], idx[1:]] = self.sup
        return M

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        sub, diag, sup = (_expand(d, x.ndim) for d in (self.sub, self.diag, self.sup))
        y = diag * x
        y[1:] += sub * x[:-1]
        y[:-1] += sup * x[1:]
        return y

    def norm_inf(self):
        row = np.abs(self.diag).copy()
        row[1:] += np.abs(self.sub)
        row[:-1] += np.abs(self.sup)
        return float(row.max())

    def __repr__(self):
        return f"TridiagMatrix(n={self.n}, lanes={self.lanes})"


def _expand(d, ndim):
    """Append singleton axes so diagonal data broadcasts against a RHS."""
    return d.reshape(d.shape + (1,) * (ndim - d.ndim))


class SweepFactor:
    """Forward-elimination coefficients of the sweep, reusable across RHS.

    ``alpha[i] = -c_i / (b_i + a_i * alpha[i-1])`` are the forward
    coefficients; ``inv_denom`` holds the reciprocal pivots.
    """

    def __init__(self, A, pivot_tiny=PIVOT_TINY):
        self.matrix = A
        n = A.n
        a, b, c = A.sub, A.diag, A.sup
        alpha = np.empty((n - 1,) + A.lanes)
        inv_denom = np.empty((n,) + A.lanes)
        denom = b[0]
        for i in range(n):
            if i > 0:
                denom = b[i] + a[i - 1] * alpha[i - 1]
            tiny = np.abs(denom) < pivot_tiny
            if np.any(tiny):
                raise PivotBreakdown(i + 1, float(np.min(np.abs(denom))))
            inv_denom[i] = 1.0 / denom
            if i < n - 1:
                alpha[i] = -c[i] * inv_denom[i]
        self.alpha = alpha
        self.inv_denom = inv_denom

    def solve(self, f):
        A = self.matrix
        f = np.asarray(f, dtype=np.float64)
        if f.shape[0] != A.n:
            raise ValueError(f"right-hand side has length {f.shape[0]}, expected {A.n}")
        if f.ndim < A.diag.ndim:
            raise ValueError(f"right-hand side needs lane axes {A.lanes}")
        nd = f.ndim
        a = _expand(A.sub, nd)
        alpha = _expand(self.alpha, nd)
        inv = _expand(self.inv_denom, nd)
        n = A.n
        x = np.empty(np.broadcast_shapes(f.shape, inv.shape))
        x[0] = f[0] * inv[0]
        for i in range(1, n):
            x[i] = (f[i] - a[i - 1] * x[i - 1]) * inv[i]
        for i in range(n - 2, -1, -1):
            x[i] += alpha[i] * x[i + 1]
        return x


def forward_coefficients(A):
    """The sweep's forward coefficients ``alpha_1 .. alpha_{n-1}``."""
    return SweepFactor(A).alpha


def thomas_solve(A, f):
    """Solve ``A x = f`` by the sequential sweep (Thomas algorithm).

    ``f`` may be a vector or have trailing batch axes ``(n, ...)``; each
    column is an independent right-hand side.
    """
    return SweepFactor(A).solve(f)


def dense_oracle_solve(A, f):
    """Reference solution by dense Gaussian elimination with partial pivoting."""
    M = A.to_dense()
    f = np.asarray(f, dtype=np.float64)
    try:
        x = np.linalg.solve(M, f)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise Singular("non-finite solution")
    return x


@dataclass(frozen=True)
class DominanceReport:
    dominant: bool
    strict_somewhere: bool
    worst_margin: float


def row_margins(A):
    """``|b_i| - |a_i| - |c_i|`` per row (boundary rows have one neighbour)."""
    m = np.abs(A.diag).copy()
    m[1:] -= np.abs(A.sub)
    m[:-1] -= np.abs(A.sup)
    return m


def check_dominance(A):
    m = row_margins(A)
    return DominanceReport(
        dominant=bool(np.all(m >= 0)),
        strict_somewhere=bool(np.any(m > 0)),
        worst_margin=float(m.min()),
    )


@dataclass(frozen=True)
class SymmetrizationResult:
    scale: np.ndarray
    sym: TridiagMatrix


def symmetrize(A):
    """Diagonal similarity ``T^-1 A T`` that makes ``A`` symmetric.

    Requires ``a_{k+1} c_k > 0`` for every k.  The scale starts at 1 and
    follows ``t_{k+1} = t_k sqrt(a_{k+1} / c_k)``.
    """
    if A.lanes:
        raise ValueError("symmetrize expects a single matrix")
    prod = A.sub * A.sup
    bad = np.flatnonzero(prod <= 0)
    if bad.size:
        k = int(bad[0])
        raise NotSymmetrizable(k + 1, float(prod[k]))
    ratio = np.sqrt(A.sub / A.sup)
    scale = np.concatenate(([1.0], np.cumprod(ratio)))
    off = np.sign(A.sup) * np.sqrt(prod)
    return SymmetrizationResult(scale=_readonly(scale), sym=TridiagMatrix(off, A.diag, off))


def inverse_row_general(A, i):
    """Row ``i`` (1-based) of ``A^-1`` from two auxiliary solves.

    With ``A y = e_n`` and ``A z = e_1 / y_1`` the inverse is

        A^-1[i, j] = y_i z_j P_j   (i <= j)
        A^-1[i, j] = z_i y_j P_j   (i >= j)

    where ``P_j = prod_{k<j} c_k / a_{k+1}``.  Raises
    :class:`OracleFallbackRequired` when the representation leaves the
    representable range; a transpose solve is the remedy.
    """
    if A.lanes:
        raise ValueError("inverse_row_general expects a single matrix")
    n = A.n
    if not 1 <= i <= n:
        raise IndexError(f"row {i} outside 1..{n}")
    if np.any(A.sub == 0) or np.any(A.sup == 0):
        raise OracleFallbackRequired("zero off-diagonal entry")
    fac = SweepFactor(A)
    e = np.zeros(n)
    e[-1] = 1.0
    y = fac.solve(e)
    if not abs(y[0]) > 1.0 / PRODUCT_LIMIT:
        raise OracleFallbackRequired(f"y_1 = {y[0]!r} too small")
    e[:] = 0.0
    e[0] = 1.0 / y[0]
    z = fac.solve(e)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        P = np.concatenate(([1.0], np.cumprod(A.sup / A.sub)))
    mag = np.abs(P)
    if not (np.all(np.isfinite(P)) and np.all(mag < PRODUCT_LIMIT) and np.all(mag > 1.0 / PRODUCT_LIMIT)):
        raise OracleFallbackRequired("cumulative product out of range")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(z))):
        raise OracleFallbackRequired("auxiliary solve overflowed")
    k = i - 1
    row = np.empty(n)
    row[k:] = y[k] * z[k:] * P[k:]
    row[:k] = z[k] * y[:k] * P[:k]
    return row


def random_dominant(n, rng, margin=0.5, same_sign=False):
    """Random strictly row-dominant matrix of order ``n``.

    Every row margin ``|b_i| - |a_i| - |c_i|`` lies in ``[margin, 1 + margin)``.
    ``same_sign=True`` gives ``a_{k+1} c_k > 0`` (symmetrizable).
    """
    sub = rng.uniform(-1, 1, n - 1)
    sup = rng.uniform(-1, 1, n - 1)
    if same_sign:
        sup = np.abs(sup) * np.sign(sub)
    off = np.abs(np.r_[0.0, sub]) + np.abs(np.r_[sup, 0.0])
    diag = (off + rng.uniform(margin, 1.0 + margin, n)) * rng.choice([-1.0, 1.0], n)
    return TridiagMatrix(sub, diag, sup)


# -- text format -------------------------------------------------------------


def format_values(values):
    return " ".join(format(float(v), ".17g") for v in values)


def write_matrix(path, A):
    if A.lanes:
        raise ValueError("only single matrices can be written")
    with open(path, "w") as fh:
        fh.write(f"{A.n}\n{format_values(A.sub)}\n{format_values(A.diag)}\n{format_values(A.sup)}\n")


def parse_floats(line, lineno, expected, path=None):
    try:
        vals = [float(tok) for tok in line.split()]
    except ValueError as exc:
        raise FormatError(f"bad number ({exc})", lineno, path) from None
    if len(vals) != expected:
        raise FormatError(f"expected {expected} values, found {len(vals)}", lineno, path)
    if not all(np.isfinite(vals)):
        raise FormatError("non-finite value", lineno, path)
    return vals


def read_matrix(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty matrix file", 1, path)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise FormatError(f"order must be an integer, got {lines[0].strip()!r}", 1, path) from None
    if n < 2:
        raise FormatError(f"order must be >= 2, got {n}", 1, path)
    rows = []
    for lineno, count in ((2, n - 1), (3, n), (4, n - 1)):
        if len(lines) < lineno:
            raise FormatError(f"missing line (expected {count} values)", lineno, path)
        rows.append(parse_floats(lines[lineno - 1], lineno, count, path))
    return TridiagMatrix(*rows)

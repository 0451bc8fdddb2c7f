"""Batched dichotomy sweep for a constant tridiagonal matrix.

The solver works in two phases.  The preliminary phase runs once per
matrix and partition: it fixes the inverse-matrix rows at the partition
boundaries, the one-sided homogeneous solutions ``Z^L``/``Z^R`` and, from
them, the combination plan used to recover boundary components level by
level.  The per-RHS phase forms the block sums (betas), resolves the
boundary components in dichotomy order and finishes with independent local
sweeps between consecutive boundaries.

Index conventions: boundaries ``n_1 < ... < n_p`` are 1-based row indices,
"positions" ``1..p`` enumerate them, and positions ``0`` and ``p + 1`` are
the sentinels.  Block ``i`` (``i = 1..p+1``) is the half-open index range
``[n_{i-1}, n_i)`` with ``n_0 = 1`` and ``n_{p+1} = n + 1``; segment ``i`` is
the closed range ``[n_{i-1}, n_i]`` with ``n_{p+1} = n`` instead.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    FLOPS_PER_ROW,
    PIVOT_TINY,
    PRODUCT_LIMIT,
    SweepFactor,
    TridiagMatrix,
    _expand,
    format_values,
    inverse_row_general,
    parse_floats,
    symmetrize,
)
from .errors import FormatError, NotSymmetrizable, OracleFallbackRequired, PivotBreakdown

log = logging.getLogger(__name__)

ROUTES = ("auto", "symmetric", "symmetrize", "general", "transpose")
# upper bound on tasks per phase; fixed so results do not depend on worker count
MAX_TASKS = 64


@dataclass(frozen=True)
class Partition:
    n: int
    boundaries: tuple

    def __post_init__(self):
        b = tuple(int(x) for x in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if self.n < 2:
            raise ValueError(f"order must be >= 2, got {self.n}")
        for k, x in enumerate(b):
            if not 1 < x < self.n:
                raise ValueError(f"boundary {x} is not interior to 1..{self.n}")
            if k and x <= b[k - 1]:
                raise ValueError("boundaries must be strictly increasing")

    @property
    def p(self):
        return len(self.boundaries)

    def index(self, pos):
        """Row index of boundary position ``pos`` (sentinels map to 1 and n)."""
        if pos == 0:
            return 1
        if pos == self.p + 1:
            return self.n
        return self.boundaries[pos - 1]

    def segments(self):
        """Closed 1-based ranges ``(lo, hi)`` between consecutive boundaries."""
        ends = (1,) + self.boundaries + (self.n,)
        return list(zip(ends[:-1], ends[1:]))

    def block_starts(self):
        """0-based start offsets of blocks 1..p+1."""
        return np.array((1,) + self.boundaries, dtype=np.intp) - 1

    def __str__(self):
        return ",".join(map(str, self.boundaries))


def parse_partition(text, n):
    text = text.strip()
    if not text:
        return Partition(n, ())
    try:
        b = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise FormatError(f"partition must be comma-separated integers, got {text!r}") from None
    try:
        return Partition(n, tuple(b))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def build_level_sets(p):
    """Dichotomy ordering of boundary positions ``1..p``.

    Level ``i`` holds positions ``2**(L - i) * k`` that no earlier level
    took, ``L = floor(log2 p) + 1``.  Positions above ``p`` are dropped so
    any ``p`` is accepted.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    if p == 0:
        return ()
    L = p.bit_length()  # floor(log2 p) + 1
    seen = set()
    levels = []
    for i in range(1, L + 1):
        stride = 1 << (L - i)
        level = [stride * k for k in range(1, (1 << i)) if stride * k <= p and stride * k not in seen]
        seen.update(level)
        levels.append(tuple(level))
    return tuple(levels)


def solve_component_direct(g_row, f):
    """One solution component as ``G_k . F``."""
    g_row = np.asarray(g_row, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if g_row.shape[0] != f.shape[0]:
        raise ValueError("g_row and f must have equal length")
    return np.tensordot(g_row, f, axes=(0, 0))


def theoretical_speedup(N, p):
    """Operation-count speedup model ``8Np / (12N + 2p^2)``."""
    return 8.0 * N * p / (12.0 * N + 2.0 * p * p)


def optimal_pe_count(N):
    return float(np.sqrt(6.0 * N))


def max_speedup(N):
    return float(np.sqrt(6.0 * N) / 3.0)


# -- preliminary phase --------------------------------------------------------


def _unit(n, k, lanes=()):
    e = np.zeros((n,) + lanes)
    e[k - 1] = 1.0
    return e


def _backward_ratios(A):
    """``rho_x = Z^R(x) / Z^R(x-1)`` from the backward sweep; ``rho[0]`` unused."""
    n = A.n
    a, b, c = A.sub, A.diag, A.sup
    rho = np.ones((n,) + A.lanes)
    for x in range(n - 1, 0, -1):
        denom = b[x] if x == n - 1 else b[x] + c[x] * rho[x + 1]
        if np.any(np.abs(denom) < PIVOT_TINY):
            raise PivotBreakdown(x + 1, float(np.min(np.abs(denom))))
        rho[x] = -a[x - 1] / denom
    return rho


class _LevelPlan:
    """Sparse combination for one dichotomy level.

    ``src`` indexes the stacked vector ``[beta_R, beta_L, X]`` (each of
    length p + 2); ``starts`` delimits the terms of each element.
    """

    def __init__(self, positions, src, coef, starts):
        self.positions = np.asarray(positions, dtype=np.intp)
        self.src = np.asarray(src, dtype=np.intp)
        self.coef = coef
        self.starts = np.asarray(starts, dtype=np.intp)

    @property
    def terms(self):
        return int(self.src.size)

    def element_slice(self, e):
        lo = self.starts[e]
        hi = self.starts[e + 1] if e + 1 < len(self.starts) else self.src.size
        return slice(lo, hi)


class PreliminaryData:
    """Everything that depends on the matrix and partition but not on the RHS."""

    def __init__(self, A, part, route="auto"):
        if not isinstance(A, TridiagMatrix):
            raise TypeError("A must be a TridiagMatrix")
        if A.n != part.n:
            raise ValueError(f"partition is for order {part.n}, matrix has order {A.n}")
        if route not in ROUTES:
            raise ValueError(f"unknown route {route!r}")
        self.matrix = A
        self.part = part
        self.levels = build_level_sets(part.p)
        self.factor = SweepFactor(A)
        self.alpha = self.factor.alpha
        self.rho = _backward_ratios(A)
        self.route = self._pick_route(route)
        self._build_windows()
        self._build_boundary_z()
        self._build_plan()
        self._build_local()

    # G rows ------------------------------------------------------------------

    def _pick_route(self, route):
        A = self.matrix
        if route != "auto":
            if A.lanes and route in ("symmetrize", "general"):
                raise ValueError(f"route {route!r} needs a single matrix")
            return route
        if A.is_symmetric():
            return "symmetric"
        if A.lanes:
            return "transpose"
        for candidate in ("symmetrize", "general"):
            try:
                self._g_rows_by(candidate, self.part.boundaries[:1] or (1,))
                return candidate
            except (NotSymmetrizable, OracleFallbackRequired) as exc:
                log.debug("route %s unavailable: %s", candidate, exc)
        return "transpose"

    @cached_property
    def _sym(self):
        s = symmetrize(self.matrix)
        t = s.scale
        if not (np.all(np.isfinite(t)) and t.max() < PRODUCT_LIMIT and t.min() > 1.0 / PRODUCT_LIMIT):
            raise OracleFallbackRequired("symmetrizing scale out of range")
        return s, SweepFactor(s.sym)

    @cached_property
    def _transpose_factor(self):
        return SweepFactor(self.matrix.transpose())

    def _g_rows_by(self, route, ks):
        """Rows ``ks`` of ``A^-1`` stacked along a new last axis."""
        A = self.matrix
        n, lanes = A.n, A.lanes
        ks = list(ks)
        if route == "general":
            return np.stack([inverse_row_general(A, k) for k in ks], axis=-1)
        if route == "symmetrize":
            s, fac = self._sym
            E = np.zeros((n, len(ks)))
            E[np.array(ks) - 1, np.arange(len(ks))] = 1.0
            ghat = fac.solve(E)
            t = s.scale
            return ghat * t[np.array(ks) - 1][None, :] / t[:, None]
        fac = self.factor if route == "symmetric" else self._transpose_factor
        if not lanes:
            E = np.zeros((n, len(ks)))
            E[np.array(ks) - 1, np.arange(len(ks))] = 1.0
            return fac.solve(E)
        return np.stack([fac.solve(_unit(n, k, lanes)) for k in ks], axis=-1)

    def g_row(self, pos):
        """Full row ``n_pos`` of ``A^-1`` (column for symmetric ``A``)."""
        k = self.part.index(pos)
        return self._g_rows_by(self.route, [k])[..., 0]

    def _build_windows(self):
        A, part = self.matrix, self.part
        n, p = A.n, part.p
        self.g_right = np.zeros((n,) + A.lanes)
        self.g_left = np.zeros((n,) + A.lanes)
        if p == 0:
            return
        # with lanes each row is as large as the matrix; keep one at a time
        G = None if A.lanes else self._g_rows_by(self.route, part.boundaries)
        starts = list(part.block_starts()) + [n]
        for pos in range(1, p + 1):
            g = self.g_row(pos) if A.lanes else G[..., pos - 1]
            lo, mid, hi = starts[pos - 1], starts[pos], starts[pos + 1]
            self.g_right[lo:mid] = g[lo:mid]  # block pos
            self.g_left[mid:hi] = g[mid:hi]  # block pos + 1

    # Z vectors ---------------------------------------------------------------

    def z_left(self, pos):
        """``Z^L`` at boundary ``pos`` over indices ``1..n_pos``."""
        k = self.part.index(pos)
        lanes = self.matrix.lanes
        with np.errstate(under="ignore"):
            body = np.cumprod(self.alpha[: k - 1][::-1], axis=0)[::-1]
        return np.concatenate([body, np.ones((1,) + lanes)])

    def z_right(self, pos):
        """``Z^R`` at boundary ``pos`` over indices ``n_pos..n``."""
        k = self.part.index(pos)
        lanes = self.matrix.lanes
        with np.errstate(under="ignore"):
            body = np.cumprod(self.rho[k:], axis=0)
        return np.concatenate([np.ones((1,) + lanes), body])

    def z_max(self):
        """Largest ``|Z^L|``/``|Z^R|`` entry over all boundaries and both sides."""
        m = 0.0
        for pos in range(1, self.part.p + 1):
            m = max(m, float(np.max(np.abs(self.z_left(pos)))), float(np.max(np.abs(self.z_right(pos)))))
        return m

    def _build_boundary_z(self):
        """``zr[j, i] = Z^R_{n_j}(n_i)`` for j <= i and ``zl[j, i] = Z^L_{n_j}(n_i)`` for i <= j."""
        part, lanes = self.part, self.matrix.lanes
        p = part.p
        self.zr = np.zeros((p + 2, p + 2) + lanes)
        self.zl = np.zeros((p + 2, p + 2) + lanes)
        if p == 0:
            return
        b = part.boundaries
        with np.errstate(under="ignore"):
            # products of the sweep ratios across each gap between boundaries
            sR = np.array([np.prod(self.rho[b[t] : b[t + 1]], axis=0) for t in range(p - 1)])
            sL = np.array([np.prod(self.alpha[b[t] - 1 : b[t + 1] - 1], axis=0) for t in range(p - 1)])
            for j in range(1, p + 1):
                self.zr[j, j] = 1.0
                self.zl[j, j] = 1.0
                if j < p:
                    self.zr[j, j + 1 : p + 1] = np.cumprod(sR[j - 1 :], axis=0)
                    self.zl[j + 1 : p + 1, j] = np.cumprod(sL[j - 1 :], axis=0)

    # combination plan ----------------------------------------------------------

    def neighbours(self):
        """``(position, level, k1, k2)`` for every boundary in dichotomy order."""
        p = self.part.p
        known = {0, p + 1}
        out = []
        for lev, level in enumerate(self.levels, 1):
            for i in level:
                k1 = max(k for k in known if k < i)
                k2 = min(k for k in known if k > i)
                out.append((i, lev, k1, k2))
            known.update(level)
        return out

    def _build_plan(self):
        p = self.part.p
        lanes = self.matrix.lanes
        zr, zl = self.zr, self.zl
        R, L, X = 0, p + 2, 2 * (p + 2)
        by_level = {}
        for i, lev, k1, k2 in self.neighbours():
            left = k1 > 0
            right = k2 <= p
            if left and right:
                det = 1.0 - zr[k1, k2] * zl[k2, k1]
                if np.any(np.abs(det) < PIVOT_TINY):
                    raise PivotBreakdown(self.part.index(i), float(np.min(np.abs(det))))
                phi1 = (zr[k1, i] - zr[k1, k2] * zl[k2, i]) / det
                phi2 = (zl[k2, i] - zl[k2, k1] * zr[k1, i]) / det
            else:
                phi1 = zr[k1, i] if left else np.zeros(lanes)
                phi2 = zl[k2, i] if right else np.zeros(lanes)
            src, coef = [], []
            jr = np.arange(k1 + 1, i + 1)
            c = zr[k1 + 1 : i + 1, i]
            if right:
                c = c - phi2 * zr[k1 + 1 : i + 1, k2]
            src.append(R + jr)
            coef.append(c)
            if right and k2 > i:
                src.append(R + np.arange(i + 1, k2 + 1))
                coef.append(-phi2 * zr[i + 1 : k2 + 1, k2])
            if left:
                src.append(L + jr)
                coef.append(-phi1 * zl[k1 : i, k1])
            jl = np.arange(i + 1, k2 + 1)
            c = zl[i : k2, i]
            if left:
                c = c - phi1 * zl[i : k2, k1]
            src.append(L + jl)
            coef.append(c)
            if left:
                src.append([X + k1])
                coef.append(np.asarray(phi1)[None])
            if right:
                src.append([X + k2])
                coef.append(np.asarray(phi2)[None])
            by_level.setdefault(lev, []).append((i, np.concatenate(src), np.concatenate(coef, axis=0)))
        self.plan = []
        for lev in sorted(by_level):
            items = by_level[lev]
            sizes = [len(s) for _, s, _ in items]
            starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
            self.plan.append(
                _LevelPlan(
                    [i for i, _, _ in items],
                    np.concatenate([s for _, s, _ in items]),
                    np.concatenate([c for _, _, c in items], axis=0),
                    starts,
                )
            )

    @property
    def combine_terms(self):
        return sum(lp.terms for lp in self.plan)

    # local systems ---------------------------------------------------------------

    def _build_local(self):
        A, part = self.matrix, self.part
        p = part.p
        self.local_factors = []
        for s, (lo, hi) in enumerate(part.segments(), 1):
            sub = A.sub[lo - 1 : hi - 1].copy()
            diag = A.diag[lo - 1 : hi].copy()
            sup = A.sup[lo - 1 : hi - 1].copy()
            if s > 1:
                diag[0], sup[0] = 1.0, 0.0
            if s <= p:
                diag[-1], sub[-1] = 1.0, 0.0
            self.local_factors.append(SweepFactor(TridiagMatrix(sub, diag, sup)))

    @property
    def local_rows(self):
        return sum(hi - lo + 1 for lo, hi in self.part.segments())


def compute_preliminary(A, part, route="auto"):
    return PreliminaryData(A, part, route)


def left_homogeneous(A, k):
    """Solve ``B^L_k Z = e^L`` directly: rows 1..k-1 of A, unit row k."""
    sub = A.sub[: k - 1].copy()
    diag = A.diag[:k].copy()
    sup = A.sup[: k - 1].copy()
    if k == 1:
        return np.ones((1,) + A.lanes)
    diag[-1], sub[-1] = 1.0, 0.0
    rhs = _unit(k, k, A.lanes)
    return SweepFactor(TridiagMatrix(sub, diag, sup)).solve(rhs)


def right_homogeneous(A, k):
    """Solve ``B^R_k Z = e^R`` directly: unit row k, rows k+1..n of A."""
    n = A.n
    if k == n:
        return np.ones((1,) + A.lanes)
    sub = A.sub[k - 1 :].copy()
    diag = A.diag[k - 1 :].copy()
    sup = A.sup[k - 1 :].copy()
    diag[0], sup[0] = 1.0, 0.0
    rhs = _unit(n - k + 1, 1, A.lanes)
    return SweepFactor(TridiagMatrix(sub, diag, sup)).solve(rhs)


# -- per right-hand side ------------------------------------------------------


@dataclass
class BetaSet:
    """Block sums indexed by boundary position ``0..p+1`` (unused slots are 0)."""

    beta_left: np.ndarray
    beta_right: np.ndarray


def _check_rhs(prelim, f):
    f = np.asarray(f, dtype=np.float64)
    A = prelim.matrix
    if f.shape[: 1 + len(A.lanes)] != (A.n,) + A.lanes:
        raise ValueError(f"right-hand side shape {f.shape} does not start with {(A.n,) + A.lanes}")
    return f


def _beta_blocks(prelim, f, out, blocks):
    """Fill ``out`` (a BetaSet) for the given block numbers."""
    part = prelim.part
    p = part.p
    n = part.n
    starts = list(part.block_starts()) + [n]
    gR = _expand(prelim.g_right, f.ndim)
    gL = _expand(prelim.g_left, f.ndim)
    for i in blocks:
        lo, hi = starts[i - 1], starts[i]
        if i <= p:
            out.beta_right[i] = np.add.reduce(gR[lo:hi] * f[lo:hi], axis=0)
        if i >= 2:
            out.beta_left[i] = np.add.reduce(gL[lo:hi] * f[lo:hi], axis=0)


def _empty_betas(prelim, f):
    shape = (prelim.part.p + 2,) + f.shape[1:]
    return BetaSet(np.zeros(shape), np.zeros(shape))


def compute_betas(f, part, prelim):
    """Block sums ``beta^R_{n_i}`` (row ``n_i``) and ``beta^L_{n_i}`` (row ``n_{i-1}``)."""
    if part != prelim.part:
        raise ValueError("preliminary data was computed for a different partition")
    f = _check_rhs(prelim, f)
    betas = _empty_betas(prelim, f)
    _beta_blocks(prelim, f, betas, range(1, part.p + 2))
    return betas


def _stack(betas, X):
    return np.concatenate([betas.beta_right, betas.beta_left, X], axis=0)


def _level_elements(lp, V, X, elements):
    for e in elements:
        sl = lp.element_slice(e)
        coef = _expand(lp.coef[sl], V.ndim)
        X[lp.positions[e]] = np.add.reduce(coef * V[lp.src[sl]], axis=0)


def solve_boundaries(prelim, betas, order=None):
    """Boundary components ``X[1..p]`` in dichotomy order.

    Returns an array indexed by position ``0..p+1``.  ``order`` optionally
    permutes the evaluation order inside each level (results do not depend
    on it).
    """
    X = np.zeros_like(betas.beta_right)
    for lp in prelim.plan:
        V = _stack(betas, X)
        elements = range(len(lp.positions)) if order is None else order(len(lp.positions))
        _level_elements(lp, V, X, elements)
    return X


def solve_boundaries_direct(prelim, betas):
    """Boundary components from the full sums over all blocks.

    Each component takes ``p + 1`` terms; returns ``(X, terms)``.
    """
    p = prelim.part.p
    zr, zl = prelim.zr, prelim.zl
    X = np.zeros_like(betas.beta_right)
    nd = X.ndim - 1
    terms = 0
    for i in range(1, p + 1):
        cr = _expand(zr[1 : i + 1, i], nd)
        cl = _expand(zl[i : p + 1, i], nd)
        X[i] = np.add.reduce(cr * betas.beta_right[1 : i + 1], axis=0) + np.add.reduce(
            cl * betas.beta_left[i + 1 : p + 2], axis=0
        )
        terms += p + 1
    return X, terms


def literal_divergence(prelim, f, variant="one_sided"):
    """Compare a one-sided level formula against the exact combination.

    That formula adds ``X_{k1} Z^R_{k1}(n_i)`` minus a single
    correction term and ``X_{k2} Z^L_{k2}(n_i)`` to the in-segment sums.
    ``variant="symmetric"`` also subtracts the mirror correction on the
    right.  Known neighbours are taken from the exact solution so the
    difference isolates the formula itself.  Returns the largest absolute
    difference per level.
    """
    part = prelim.part
    p = part.p
    f = _check_rhs(prelim, f)
    betas = compute_betas(f, part, prelim)
    X = solve_boundaries(prelim, betas)
    zr, zl = prelim.zr, prelim.zl
    out = {}
    for i, lev, k1, k2 in prelim.neighbours():
        nd = X.ndim - 1
        val = np.add.reduce(_expand(zr[k1 + 1 : i + 1, i], nd) * betas.beta_right[k1 + 1 : i + 1], axis=0)
        val = val + np.add.reduce(_expand(zl[i:k2, i], nd) * betas.beta_left[i + 1 : k2 + 1], axis=0)
        if k1 > 0:
            n1 = part.index(k1)
            val = val + X[k1] * _expand(zr[k1, i], nd)
            val = val - _expand(prelim.g_right[n1 - 1] * zr[k1 + 1, i], nd) * f[n1 - 1]
        if k2 <= p:
            n2 = part.index(k2)
            val = val + X[k2] * _expand(zl[k2, i], nd)
            if variant == "symmetric":
                val = val - _expand(prelim.g_left[n2 - 1] * zl[k2 - 1, i], nd) * f[n2 - 1]
        out[lev] = max(out.get(lev, 0.0), float(np.max(np.abs(val - X[i]))))
    return out


def solve_local(prelim, s, f_seg, first_val=None, last_val=None):
    """Solve segment ``s`` (1..p+1) given its bracketing boundary values.

    ``f_seg`` covers the closed segment.  Rows that are system endpoints
    keep their original equations; the others are replaced by unit rows
    carrying ``first_val``/``last_val``.
    """
    p = prelim.part.p
    f_seg = np.array(f_seg, dtype=np.float64)
    if s > 1:
        f_seg[0] = first_val
    if s <= p:
        f_seg[-1] = last_val
    return prelim.local_factors[s - 1].solve(f_seg)


class _Inline:
    """Runs every task immediately, in order."""

    def run_phase(self, name, tasks):
        for _, fn in tasks:
            fn()


def _chunks(seq, k):
    seq = list(seq)
    if not seq:
        return []
    k = max(1, min(k, len(seq)))
    size = -(-len(seq) // k)
    return [seq[i : i + size] for i in range(0, len(seq), size)]


class DichotomySolver:
    """Solve ``A x = f`` for many right-hand sides with a fixed partition."""

    def __init__(self, A, part, route="auto"):
        self.prelim = PreliminaryData(A, part, route)

    @property
    def matrix(self):
        return self.prelim.matrix

    @property
    def part(self):
        return self.prelim.part

    def solve(self, F, engine=None):
        """``F`` has shape ``(n, *lanes, *batch)``; returns ``x`` of the same shape."""
        engine = engine or _Inline()
        pre = self.prelim
        part = pre.part
        p = part.p
        F = _check_rhs(pre, F)
        betas = _empty_betas(pre, F)
        groups = _chunks(range(1, p + 2), MAX_TASKS)
        engine.run_phase(
            "betas",
            [(g[0], (lambda g=g: _beta_blocks(pre, F, betas, g))) for g in groups if p > 0],
        )
        X = np.zeros_like(betas.beta_right)
        for lev, lp in enumerate(pre.plan, 1):
            V = _stack(betas, X)
            parts = _chunks(range(len(lp.positions)), MAX_TASKS)
            engine.run_phase(
                f"level {lev}",
                [(int(lp.positions[c[0]]), (lambda c=c, lp=lp, V=V: _level_elements(lp, V, X, c))) for c in parts],
            )
        x = np.empty(F.shape)
        segs = part.segments()

        def local(chunk):
            for s in chunk:
                lo, hi = segs[s - 1]
                x[lo - 1 : hi] = solve_local(pre, s, F[lo - 1 : hi], X[s - 1], X[s])

        engine.run_phase("local", [(c[0], (lambda c=c: local(c))) for c in _chunks(range(1, p + 2), MAX_TASKS)])
        return x

    def flops(self, columns):
        return FLOPS_PER_ROW * self.prelim.local_rows * columns


def solve_batch(A, part, F_series, route="auto", engine=None):
    """Solve for each row of ``F_series`` (shape ``(N, n)``); returns ``(N, n)``."""
    F = np.atleast_2d(np.asarray(F_series, dtype=np.float64))
    solver = DichotomySolver(A, part, route)
    return solver.solve(F.T, engine).T


# -- batch text format ----------------------------------------------------------


def read_rhs(path):
    """RHS file: first line ``n N``, then N rows of n values."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty RHS file", 1, path)
    head = lines[0].split()
    try:
        n, N = (int(t) for t in head)
    except ValueError:
        raise FormatError(f"header must be 'n N', got {lines[0]!r}", 1, path) from None
    if len(lines) < N + 1:
        raise FormatError(f"expected {N} rows, found {len(lines) - 1}", len(lines) + 1, path)
    rows = [parse_floats(lines[k], k + 1, n, path) for k in range(1, N + 1)]
    return np.array(rows, dtype=np.float64).reshape(N, n)


def write_rows(path, X):
    X = np.atleast_2d(X)
    with open(path, "w") as fh:
        fh.write(f"{X.shape[1]} {X.shape[0]}\n")
        for row in X:
            fh.write(format_values(row) + "\n")

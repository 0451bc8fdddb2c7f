"""Exception types raised by the solvers."""


class SweepError(Exception):
    """Base class for solver failures."""


class PivotBreakdown(SweepError, ArithmeticError):
    """An elimination pivot fell below the breakdown threshold."""

    def __init__(self, row, pivot):
        self.row = row
        self.pivot = pivot
        super().__init__(f"pivot breakdown at row {row} (|pivot| = {abs(pivot):.3e})")


class Singular(SweepError, ArithmeticError):
    pass


class NotSymmetrizable(SweepError, ValueError):
    """Some product of symmetric off-diagonal entries is not positive."""

    def __init__(self, k, product):
        self.k = k
        self.product = product
        super().__init__(f"a[{k + 1}]*c[{k}] = {product!r} is not positive")


class OracleFallbackRequired(SweepError, ArithmeticError):
    """The explicit inverse representation over/underflowed.

    Callers should obtain the inverse row by a transpose solve instead.
    """


class TooManyPEs(SweepError, ValueError):
    pass


class WorkerPanic(SweepError, RuntimeError):
    """A task failed inside the execution engine."""

    def __init__(self, pe, phase, cause):
        self.pe = pe
        self.phase = phase
        self.cause = cause
        super().__init__(f"PE {pe} failed during {phase}: {cause!r}")


class NonConvergence(SweepError, RuntimeError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations (last change {residual:.3e})"
        )


class FormatError(ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)

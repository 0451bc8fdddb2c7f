"""Batched dichotomy sweep for tridiagonal systems and fast Poisson solvers."""

from .core import TridiagMatrix, dense_oracle_solve, thomas_solve
from .dichotomy import DichotomySolver, Partition, compute_preliminary, solve_batch
from .errors import SweepError
from .poisson import ADISolver, FourierSolver, Grid2D, adi_solve, fourier_solve
from .runtime import decompose, run_batch

__all__ = [
    "ADISolver",
    "DichotomySolver",
    "FourierSolver",
    "Grid2D",
    "Partition",
    "SweepError",
    "TridiagMatrix",
    "adi_solve",
    "compute_preliminary",
    "decompose",
    "dense_oracle_solve",
    "fourier_solve",
    "run_batch",
    "solve_batch",
    "thomas_solve",
]

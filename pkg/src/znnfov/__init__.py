"""znnfov: field-of-values boundary points of complex matrices.

Two routes to the boundary of ``F(A) = {x* A x : ||x|| = 1}``:

* a per-angle hermitean eigendecomposition oracle over the flow
  ``A(t) = cos(t) H + sin(t) K``, and
* a predictive ZNN-style recurrence that advances one extreme eigenpair a
  full angle step ahead of its data using convergent look-ahead finite
  difference schemes,

plus scheme zero-stability analysis, accuracy metrics against the oracle and
a reproducible benchmark harness.
"""

from .linalg import (ConstantHermitianFlow, HermitianFlow, SingularSystemError,
                     constant_flow, hermitian_split, is_normal, solve_linear)
from .eigensolver import (EigenDecomposition, EigenSolverError, NonHermitianError,
                          PhaseContinuityError, extreme_pair, hermitian_eig,
                          phase_align)
from .schemes import (InconsistentSchemeError, SchemeError, SchemeSpec,
                      StabilityReport, UnstableSchemeError, builtin_schemes,
                      check_zero_stability, consistency_coefficient, find_roots,
                      get_scheme, load_scheme_file, normalize)
from .engine import (TWO_PI, DivergenceError, EigenPairState, HistoryWindow,
                     StepFailureError, SweepFailure, ZnnParams, angle_grid,
                     assemble_system, startup, state_residual, sweep, znn_step)
from .results import BoundaryPoint, DigitsStats, SweepResult
from .analysis import (GridMismatchError, accurate_digits, compare_sweeps,
                       convex_hull, convexity_defect, oracle_arrays,
                       oracle_sweep, polygon_area)
from .bench import (DEFAULT_H_RANGES, BenchRow, TuneResult, gen_matrix,
                    load_matrix, run_bench, save_matrix, tune_eta)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # linalg
    "HermitianFlow", "ConstantHermitianFlow", "SingularSystemError",
    "hermitian_split", "constant_flow", "is_normal", "solve_linear",
    # eigensolver
    "EigenDecomposition", "EigenSolverError", "NonHermitianError",
    "PhaseContinuityError", "hermitian_eig", "extreme_pair", "phase_align",
    # schemes
    "SchemeSpec", "StabilityReport", "SchemeError", "InconsistentSchemeError",
    "UnstableSchemeError", "normalize", "consistency_coefficient", "find_roots",
    "check_zero_stability", "builtin_schemes", "get_scheme", "load_scheme_file",
    # engine
    "TWO_PI", "ZnnParams", "EigenPairState", "HistoryWindow", "SweepFailure",
    "StepFailureError", "DivergenceError", "angle_grid", "assemble_system",
    "startup", "state_residual", "sweep", "znn_step",
    # results & analysis
    "BoundaryPoint", "SweepResult", "DigitsStats", "GridMismatchError",
    "oracle_sweep", "oracle_arrays", "accurate_digits", "compare_sweeps",
    "convex_hull", "convexity_defect", "polygon_area",
    # bench
    "DEFAULT_H_RANGES", "BenchRow", "TuneResult", "gen_matrix", "save_matrix",
    "load_matrix", "tune_eta", "run_bench",
]

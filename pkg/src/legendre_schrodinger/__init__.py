"""Legendre-Galerkin / Gauss-Runge-Kutta solver for the 2D linear Schrodinger equation

    i u_t = -gamma (u_xx + u_yy) + psi(x, y) u + f   on (c, d)^2.

Space is discretized with the Shen basis phi_k = c_k (L_k - L_{k+2}), time with
the three-stage Gauss collocation method, and each stage system is solved
matrix-free by restarted GMRES.
"""

from .assembly import SemidiscreteSystem, build_system
from .basis import BasisSet, GridTransform, MassMatrix, mass_matrix, mass_solve
from .gmres import GmresConfig, SolveReport, gmres_solve
from .irk import ButcherTableau, MatrixSystem, StepFailure, gauss3_tableau, integrate, irk_step
from .kronvec import kron, kron_apply, unvec_rowmajor, vec_rowmajor
from .orthopoly import QuadratureRule, legendre_eval, lgl_rule
from .problem import (
    CompatibilityError,
    ExactSolution,
    LiftedProblem,
    SchrodingerProblem,
    residual,
    test_problem_1,
    test_problem_2,
    zero_dirichlet_problem,
)
from .solver import RunConfig, convergence_sweep, error_table, run, time_order_sweep

__all__ = [
    "BasisSet",
    "ButcherTableau",
    "CompatibilityError",
    "ExactSolution",
    "GmresConfig",
    "GridTransform",
    "LiftedProblem",
    "MassMatrix",
    "MatrixSystem",
    "QuadratureRule",
    "RunConfig",
    "SchrodingerProblem",
    "SemidiscreteSystem",
    "SolveReport",
    "StepFailure",
    "build_system",
    "convergence_sweep",
    "error_table",
    "gauss3_tableau",
    "gmres_solve",
    "integrate",
    "irk_step",
    "kron",
    "kron_apply",
    "legendre_eval",
    "lgl_rule",
    "mass_matrix",
    "mass_solve",
    "residual",
    "run",
    "test_problem_1",
    "test_problem_2",
    "time_order_sweep",
    "unvec_rowmajor",
    "vec_rowmajor",
    "zero_dirichlet_problem",
]

"""Solvers for multilinear systems ``A x^{m-1} = b`` with M-tensor coefficients."""
from ._kernels import BACKEND
from .config import METHODS, PRECONDITIONERS, SolveReport, SolverConfig
from .errors import MtaarError
from .flops import FlopsModel, flops_per_iteration
from .problems import (
    ProblemInstance,
    appendix_example61,
    appendix_problem3,
    gen_gravity_bvp,
    gen_random_mtensor,
    gen_sine_symmetric,
)
from .solvers import solve
from .splitting import (
    solve_fullm,
    solve_gs1,
    solve_gs2,
    solve_gs3,
    solve_j1,
    solve_j2,
    solve_j3,
    solve_newton_symmetric,
    solve_sorlike,
)
from .taar import aar_linear_solve, taar_solve
from .tensor import (
    DenseTensor,
    apply_xm1,
    apply_xm2,
    as_tensor,
    extract_part,
    identity_tensor,
    majorization_matrix,
    mode_product,
    verify_nonsingular_m_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "METHODS",
    "PRECONDITIONERS",
    "SolveReport",
    "SolverConfig",
    "MtaarError",
    "FlopsModel",
    "flops_per_iteration",
    "ProblemInstance",
    "appendix_example61",
    "appendix_problem3",
    "gen_gravity_bvp",
    "gen_random_mtensor",
    "gen_sine_symmetric",
    "solve",
    "solve_fullm",
    "solve_gs1",
    "solve_gs2",
    "solve_gs3",
    "solve_j1",
    "solve_j2",
    "solve_j3",
    "solve_newton_symmetric",
    "solve_sorlike",
    "aar_linear_solve",
    "taar_solve",
    "DenseTensor",
    "apply_xm1",
    "apply_xm2",
    "as_tensor",
    "extract_part",
    "identity_tensor",
    "majorization_matrix",
    "mode_product",
    "verify_nonsingular_m_tensor",
]

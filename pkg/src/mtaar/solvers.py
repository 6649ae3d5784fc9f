"""Single entry point that routes a :class:`SolverConfig` to its method."""
from __future__ import annotations

import numpy as np

from .config import SolveReport, SolverConfig
from .errors import UnknownMethodError
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
from .tensor import as_tensor


def solve(A, b, cfg: SolverConfig) -> SolveReport:
    """Run ``cfg.method`` on ``A x^{m-1} = b``.

    ``aar-linear`` expects an order-2 tensor (a matrix) and always uses the
    Jacobi preconditioner.
    """
    method = cfg.method
    if method == "aar-linear":
        A = as_tensor(A)
        if A.order != 2:
            raise UnknownMethodError("aar-linear solves matrix problems only (m = 2)")
        return aar_linear_solve(np.asarray(A.array), b, cfg)
    if method in ("tr", "taar"):
        return taar_solve(A, b, cfg)
    if method == "j1sor":
        return solve_sorlike(A, b, cfg, m_part="D")
    if method == "gs1sor":
        return solve_sorlike(A, b, cfg, m_part="L")
    table = {
        "j1": solve_j1,
        "gs1": solve_gs1,
        "newton": solve_newton_symmetric,
        "j2": solve_j2,
        "gs2": solve_gs2,
        "j3": solve_j3,
        "gs3": solve_gs3,
        "fullm": solve_fullm,
    }
    try:
        fn = table[method]
    except KeyError:
        raise UnknownMethodError(f"unknown method {method!r}") from None
    return fn(A, b, cfg)

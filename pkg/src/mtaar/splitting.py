"""Classical tensor splitting iterations for ``A x^{m-1} = b``.

Three families are provided:

* diagonal / triangular splittings with tensor root solves:
  ``j1``, ``gs1``, ``j1sor``, ``gs1sor`` and the symmetric ``newton`` method;
* splittings that linearise through ``A x^{m-2}``: ``j2``, ``gs2``;
* regular splittings ``A = M(E) I - F`` reduced to matrix solves:
  ``j3``, ``gs3``, ``fullm``.

All of them share :func:`iterate`, which evaluates the stopping rule before
each update so an already-converged ``x0`` costs zero iterations.
"""
from __future__ import annotations

import logging
import time
from typing import Callable

import numpy as np

from . import _kernels
from .config import SolveReport, SolverConfig
from .errors import InvalidProblemError, NonregularSplittingError, RootSolveError
from .flops import flops_per_iteration
from .linalg import LUFactor, solve_diagonal, solve_lower_triangular
from .tensor import (
    DenseTensor,
    apply_xm1,
    apply_xm2,
    as_tensor,
    diagonal_entries,
    elementwise_pow,
    extract_part,
    is_symmetric,
    is_z_tensor,
    majorization_indices,
    majorization_matrix,
    verify_nonsingular_m_tensor,
)

logger = logging.getLogger(__name__)

SYMMETRY_ATOL = 1e-12
NONREGULAR_ATOL = 1e-12
SOR_FACTOR = 0.35


def check_problem(A: DenseTensor, b, x0, *, m_tensor: bool = True) -> list:
    """Validate the solver preconditions; return advisory flags.

    Raises ``InvalidProblemError`` for a nonpositive ``b`` or ``x0``, or
    (when ``m_tensor``) for a tensor that is not a Z-tensor. A Z-tensor whose
    certificate fails with probe ``e`` is accepted with the flag
    ``m_tensor_not_certified``; that test is only sufficient.
    """
    flags = []
    if not np.all(np.asarray(b) > 0):
        raise InvalidProblemError("right-hand side must be strictly positive")
    if not np.all(np.asarray(x0) > 0):
        raise InvalidProblemError("initial vector must be strictly positive")
    if m_tensor:
        if not is_z_tensor(A):
            raise InvalidProblemError("coefficient tensor is not a Z-tensor")
        if not verify_nonsingular_m_tensor(A):
            flags.append("m_tensor_not_certified")
    return flags


def iterate(
    A: DenseTensor,
    b,
    cfg: SolverConfig,
    step: Callable,
    *,
    method: str,
    flags=None,
    after_eval: Callable = None,
) -> SolveReport:
    """Run ``x <- step(x, A x^{m-1})`` until the stopping rule holds.

    A step that raises ``RootSolveError`` ends the run with the flag
    ``root_solve_failed`` and ``converged=False``.
    """
    b = np.asarray(b, dtype=np.float64)
    flags = list(flags or [])
    per_iter = flops_per_iteration(method, A.order, A.dim)
    t0 = time.perf_counter()

    x = cfg.initial_vector(A.dim)
    Ax = apply_xm1(A, x)
    res = float(np.linalg.norm(b - Ax))
    scale = res if cfg.stopping_mode == "relative" and res > 0 else 1.0
    history = [res / scale]
    flops = [0]
    wall_ms = [0.0]
    nonpositive = bool(np.any(x <= 0))

    k = 0
    while history[-1] > cfg.tol and k < cfg.max_iter:
        try:
            x_new = step(x, Ax)
        except RootSolveError as exc:
            # the triangular equation of some row has no positive root
            logger.info("%s stopped at iteration %d: %s", method, k, exc)
            flags.append("root_solve_failed")
            break
        x = x_new
        k += 1
        Ax = apply_xm1(A, x)
        history.append(float(np.linalg.norm(b - Ax)) / scale)
        flops.append(k * per_iter)
        wall_ms.append(1000.0 * (time.perf_counter() - t0))
        if np.any(x <= 0):
            nonpositive = True
        if after_eval is not None:
            after_eval(x, Ax, flags)
        if not np.isfinite(history[-1]):
            flags.append("diverged")
            break

    return SolveReport(
        method=method,
        converged=bool(history[-1] <= cfg.tol),
        iterations=k,
        residual_history=history,
        cumulative_flops=flops,
        wall_ms=wall_ms,
        wall_time_s=time.perf_counter() - t0,
        solution=x,
        nonpositive_iterate_flag=nonpositive,
        stopping_mode=cfg.stopping_mode,
        flags=flags,
    )


def _root(v, m):
    return elementwise_pow(v, 1.0 / (m - 1))


# ---------------------------------------------------------------------------
# tensor splitting method 1
# ---------------------------------------------------------------------------

def solve_j1(A, b, cfg: SolverConfig = SolverConfig(method="j1")) -> SolveReport:
    """Jacobi: ``x_i <- ((F x^{m-1} + b)_i / a_{i..i})^{1/(m-1)}`` with F = D - A."""
    A = as_tensor(A)
    m = A.order
    flags = check_problem(A, b, cfg.initial_vector(A.dim))
    d = diagonal_entries(A)

    def step(x, Ax):
        Fx = d * elementwise_pow(x, m - 1) - Ax
        return _root((Fx + b) / d, m)

    return iterate(A, b, cfg, step, method="j1", flags=flags)


def _triangular_solve(A: DenseTensor, rhs, hint, shift=0.0):
    out = np.zeros(A.dim)
    bad = _kernels.triangular_sweep(A.data, A.dim, A.order, np.asarray(rhs, dtype=np.float64),
                                    np.asarray(hint, dtype=np.float64), float(shift), out)
    if bad >= 0:
        raise RootSolveError(f"no positive root in forward substitution at row {bad}")
    return out


def solve_gs1(A, b, cfg: SolverConfig = SolverConfig(method="gs1")) -> SolveReport:
    """Gauss-Seidel: solve ``L y^{m-1} = F x^{m-1} + b`` by forward substitution."""
    A = as_tensor(A)
    flags = check_problem(A, b, cfg.initial_vector(A.dim))
    L = extract_part(A, "lower_triangular")

    def step(x, Ax):
        rhs = apply_xm1(L, x) - Ax + b
        return _triangular_solve(A, rhs, x)

    return iterate(A, b, cfg, step, method="gs1", flags=flags)


def default_omega(A: DenseTensor) -> float:
    return SOR_FACTOR * float(np.min(diagonal_entries(A)))


def solve_sorlike(A, b, cfg: SolverConfig = SolverConfig(method="j1sor"), m_part: str = "D") -> SolveReport:
    """SOR-like iteration ``(M - w I) y^{m-1} = (N - w I) x^{m-1} + b``.

    ``m_part`` selects ``M``: ``"D"`` (diagonal part, method ``j1sor``) or
    ``"L"`` (lower triangular part, method ``gs1sor``). The relaxation
    defaults to ``0.35 * min_i a_{i..i}``.
    """
    A = as_tensor(A)
    m = A.order
    if m_part not in ("D", "L"):
        raise ValueError(f"m_part must be 'D' or 'L', got {m_part!r}")
    method = "j1sor" if m_part == "D" else "gs1sor"
    flags = check_problem(A, b, cfg.initial_vector(A.dim))
    omega = default_omega(A) if cfg.omega is None else float(cfg.omega)
    d = diagonal_entries(A)

    if m_part == "D":
        def step(x, Ax):
            xm = elementwise_pow(x, m - 1)
            rhs = (d * xm - Ax) - omega * xm + b
            return _root(rhs / (d - omega), m)
    else:
        L = extract_part(A, "lower_triangular")

        def step(x, Ax):
            rhs = (apply_xm1(L, x) - Ax) - omega * elementwise_pow(x, m - 1) + b
            return _triangular_solve(A, rhs, x, shift=omega)

    return iterate(A, b, cfg, step, method=method, flags=flags)


def solve_newton_symmetric(A, b, cfg: SolverConfig = SolverConfig(method="newton")) -> SolveReport:
    """Newton's method for symmetric M-tensors.

    ``x <- M_k^{-1}((m-2)/(m-1) A x^{m-1} + b/(m-1))`` with ``M_k = A x^{m-2}``.
    Leaving ``{x > 0, A x^{m-1} > 0}`` is reported as a flag, not an error.
    """
    A = as_tensor(A)
    m = A.order
    if not is_symmetric(A, SYMMETRY_ATOL):
        raise InvalidProblemError("Newton's method requires a symmetric tensor")
    flags = check_problem(A, b, cfg.initial_vector(A.dim))

    def step(x, Ax):
        Mk = apply_xm2(A, x)
        return LUFactor.factor(Mk).solve((m - 2) / (m - 1) * Ax + b / (m - 1))

    def watch(x, Ax, flags):
        if "left_omega_region" not in flags and (np.any(x <= 0) or np.any(Ax <= 0)):
            flags.append("left_omega_region")

    return iterate(A, b, cfg, step, method="newton", flags=flags, after_eval=watch)


# ---------------------------------------------------------------------------
# tensor splitting method 2
# ---------------------------------------------------------------------------

def _warn_if_nonsymmetric(A, method, flags):
    if not is_symmetric(A, SYMMETRY_ATOL):
        logger.info("%s applied to a nonsymmetric tensor", method)
        flags.append("nonsymmetric")


def solve_j2(A, b, cfg: SolverConfig = SolverConfig(method="j2")) -> SolveReport:
    """``x <- x + (D~ x^{m-2})^{-1} (b - A x^{m-1}) / (m-1)``, D~ the diagonal face."""
    A = as_tensor(A)
    m = A.order
    flags = check_problem(A, b, cfg.initial_vector(A.dim), m_tensor=False)
    _warn_if_nonsymmetric(A, "j2", flags)

    def step(x, Ax):
        # (D~ x^{m-2}) is the diagonal of A x^{m-2}: contracted modes never touch i2
        dface = np.diag(apply_xm2(A, x)).copy()
        return x + solve_diagonal(dface, b - Ax) / (m - 1)

    return iterate(A, b, cfg, step, method="j2", flags=flags)


def solve_gs2(A, b, cfg: SolverConfig = SolverConfig(method="gs2")) -> SolveReport:
    """As :func:`solve_j2` with the lower half part ``L~``."""
    A = as_tensor(A)
    m = A.order
    flags = check_problem(A, b, cfg.initial_vector(A.dim), m_tensor=False)
    _warn_if_nonsymmetric(A, "gs2", flags)

    def step(x, Ax):
        lhalf = np.tril(apply_xm2(A, x))
        return x + solve_lower_triangular(lhalf, b - Ax) / (m - 1)

    return iterate(A, b, cfg, step, method="gs2", flags=flags)


# ---------------------------------------------------------------------------
# tensor splitting method 3 (regular splittings)
# ---------------------------------------------------------------------------

def splitting_matrix(A: DenseTensor, kind: str) -> np.ndarray:
    """``M(E)`` for ``kind`` in ``diagonal``, ``lower``, ``full``."""
    MA = majorization_matrix(A)
    if kind == "diagonal":
        return np.diag(np.diag(MA))
    if kind == "lower":
        return np.tril(MA)
    if kind == "full":
        return MA
    raise ValueError(f"unknown splitting kind {kind!r}")


def check_regular_splitting(A: DenseTensor, ME: np.ndarray, atol: float = NONREGULAR_ATOL) -> None:
    """Raise unless ``F = M(E) I - A`` is entrywise >= -atol."""
    n, m = A.dim, A.order
    if np.min(ME - majorization_matrix(A)) < -atol:
        raise NonregularSplittingError("M(E) - M(A) has a negative entry")
    idx = majorization_indices(m, n)
    for i in range(n):
        slab = A.array[i].reshape(-1).copy()
        slab[idx[i] - i * n ** (m - 1)] = -np.inf
        if slab.max() > atol:
            raise NonregularSplittingError("F has a negative entry off the majorization positions")


def _regular_splitting(A, b, cfg, kind, method):
    A = as_tensor(A)
    m = A.order
    flags = check_problem(A, b, cfg.initial_vector(A.dim))
    ME = splitting_matrix(A, kind)
    check_regular_splitting(A, ME)

    if kind == "diagonal":
        d = np.diag(ME).copy()
        mult = lambda v: d * v  # noqa: E731
        solve = lambda c: solve_diagonal(d, c)  # noqa: E731
    elif kind == "lower":
        mult = ME.__matmul__
        solve = lambda c: solve_lower_triangular(ME, c)  # noqa: E731
    else:
        lu = LUFactor.factor(ME)
        mult = ME.__matmul__
        solve = lu.solve

    def step(x, Ax):
        Fx = mult(elementwise_pow(x, m - 1)) - Ax
        return _root(solve(b + Fx), m)

    return iterate(A, b, cfg, step, method=method, flags=flags)


def solve_j3(A, b, cfg: SolverConfig = SolverConfig(method="j3")) -> SolveReport:
    return _regular_splitting(A, b, cfg, "diagonal", "j3")


def solve_gs3(A, b, cfg: SolverConfig = SolverConfig(method="gs3")) -> SolveReport:
    return _regular_splitting(A, b, cfg, "lower", "gs3")


def solve_fullm(A, b, cfg: SolverConfig = SolverConfig(method="fullm")) -> SolveReport:
    return _regular_splitting(A, b, cfg, "full", "fullm")

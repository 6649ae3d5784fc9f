"""Tensor alternating Anderson-Richardson iteration.

The unknown is carried as ``y = x^[m-1]`` and updated as ``y <- y + V r`` with
the preconditioned residual ``r = M(E)^{-1} (b - A x^{m-1})``. Most steps are
Richardson steps (``V = omega I``); every ``p``-th step applies an Anderson
correction built from the last ``q`` differences of ``y`` and ``r``. Both
relaxation weights minimise the linearised residual ``b - (A x^{m-2}) x_new``.

A plain-matrix version of the same scheme (``aar_linear_solve``) is kept as
the reference the tensor code reduces to when ``m = 2``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .config import SolveReport, SolverConfig
from .errors import ZeroDiagonalError
from .flops import flops_per_iteration
from .linalg import LUFactor, lstsq_gamma, solve_diagonal, solve_lower_triangular
from .splitting import check_problem
from .tensor import DenseTensor, apply_xm2, as_tensor, elementwise_pow, majorization_matrix

DEGENERATE_DENOM = 1e-300
XPOW_FLOOR = 1e-30

_KINDS = ("pj", "pgs", "pf")


@dataclass(frozen=True, eq=False)
class Preconditioner:
    """``M(E)`` taken from the majorization matrix, factorised on first use."""

    kind: str
    matrix: np.ndarray

    @cached_property
    def factor(self):
        if self.kind == "pj":
            return np.diag(self.matrix).copy()
        if self.kind == "pgs":
            return self.matrix
        return LUFactor.factor(self.matrix)

    def solve(self, c) -> np.ndarray:
        if self.kind == "pj":
            return solve_diagonal(self.factor, c)
        if self.kind == "pgs":
            return solve_lower_triangular(self.factor, c)
        return self.factor.solve(c)


def build_preconditioner(A: DenseTensor, kind: str = "pf") -> Preconditioner:
    """PJ: diagonal of ``M(A)``; PGS: its lower triangle; PF: all of ``M(A)``."""
    if kind not in _KINDS:
        raise ValueError(f"unknown preconditioner {kind!r}")
    A = as_tensor(A)
    MA = majorization_matrix(A)
    if np.any(np.diag(MA) == 0.0):
        raise ZeroDiagonalError("majorization matrix has a zero diagonal entry")
    if kind == "pj":
        return Preconditioner(kind, np.diag(np.diag(MA)))
    if kind == "pgs":
        return Preconditioner(kind, np.tril(MA))
    return Preconditioner(kind, MA)


def residual(A: DenseTensor, b, P: Preconditioner, x) -> np.ndarray:
    """Preconditioned residual ``M(E)^{-1} (b - A x^{m-1})``."""
    A = as_tensor(A)
    B = apply_xm2(A, x)
    return P.solve(np.asarray(b, dtype=np.float64) - B @ x)


@dataclass
class HistoryWindow:
    """Ring buffer of the last ``q`` iterate and residual differences."""

    n: int
    q: int
    X: np.ndarray = None
    R: np.ndarray = None
    filled: int = 0

    def __post_init__(self):
        if self.X is None:
            self.X = np.zeros((self.n, self.q))
        if self.R is None:
            self.R = np.zeros((self.n, self.q))

    def record(self, k: int, dx, dr) -> None:
        """Store the differences seen at iteration ``k`` (k >= 2) in column ``(k-2) mod q``."""
        col = (k - 2) % self.q
        self.X[:, col] = dx
        self.R[:, col] = dr
        self.filled = min(self.q, self.filled + 1)

    def columns(self):
        return self.X[:, : self.filled], self.R[:, : self.filled]


@dataclass
class TaarState:
    """Current iterate plus everything derived from it.

    ``B = A x^{m-2}`` is computed once per iterate; ``A x^{m-1}`` is ``B x``.
    """

    x: np.ndarray
    xm1: np.ndarray
    k: int = 0
    window: Optional[HistoryWindow] = None
    B: np.ndarray = None
    resid: np.ndarray = None  # b - A x^{m-1}
    r: np.ndarray = None  # M(E)^{-1} resid
    flags: list = field(default_factory=list)

    @classmethod
    def start(cls, A: DenseTensor, b, P: Preconditioner, x0, q: int = 6) -> "TaarState":
        x0 = np.asarray(x0, dtype=np.float64)
        st = cls(x=x0.copy(), xm1=elementwise_pow(x0, A.order - 1), window=HistoryWindow(A.dim, q))
        st.evaluate(A, b, P)
        return st

    def evaluate(self, A: DenseTensor, b, P: Preconditioner) -> None:
        self.B = apply_xm2(A, self.x)
        self.resid = np.asarray(b, dtype=np.float64) - self.B @ self.x
        self.r = P.solve(self.resid)

    def set_xm1(self, xm1, m: int) -> None:
        self.xm1 = xm1
        self.x = elementwise_pow(xm1, 1.0 / (m - 1))


def _guarded_xm2(x, m):
    v = elementwise_pow(x, m - 2)
    small = np.abs(v) < XPOW_FLOOR
    if np.any(small):
        v = np.where(small, np.where(v < 0, -XPOW_FLOOR, XPOW_FLOOR), v)
    return v


def _flag(state, name):
    if name not in state.flags:
        state.flags.append(name)


def tr_step(A: DenseTensor, b, P: Preconditioner, state: TaarState) -> TaarState:
    """Richardson step ``x^[m-1] += omega r`` with the quasi-residual optimal omega.

    The state must have been evaluated at its current ``x``; the caller
    re-evaluates after the step.
    """
    m = A.order
    u1 = state.r / _guarded_xm2(state.x, m)
    Bu1 = state.B @ u1
    den = float(Bu1 @ Bu1)
    if den < DEGENERATE_DENOM:
        _flag(state, "degenerate_direction")
        omega = 0.0
    else:
        omega = float(state.resid @ Bu1) / den
    state.set_xm1(state.xm1 + omega * state.r, m)
    return state


def tar_step(A: DenseTensor, b, P: Preconditioner, state: TaarState) -> TaarState:
    """Anderson-corrected Richardson step.

    ``x^[m-1] += beta r - (X + beta R) Gamma`` where ``Gamma`` fits ``r`` by the
    columns of ``R`` and ``beta`` minimises the linearised residual. Falls back
    to :func:`tr_step` when the history is empty. When ``r - R Gamma``
    degenerates (for instance an exact fit), ``beta = 0`` and only the
    ``-X Gamma`` correction is applied.
    """
    m = A.order
    if state.window is None or state.window.filled == 0:
        _flag(state, "empty_history")
        return tr_step(A, b, P, state)
    X, R = state.window.columns()
    gamma = lstsq_gamma(R, state.r)
    XG = X @ gamma
    RG = R @ gamma
    xm2 = _guarded_xm2(state.x, m)
    Bu2 = state.B @ (XG / xm2)
    Bu3 = state.B @ ((state.r - RG) / xm2)
    den = float(Bu3 @ Bu3)
    if den < DEGENERATE_DENOM:
        _flag(state, "degenerate_direction")
        beta = 0.0
    else:
        beta = float((state.resid + Bu2) @ Bu3) / den
    state.set_xm1(state.xm1 + (beta * state.r - (XG + beta * RG)), m)
    return state


def taar_solve(A, b, cfg: SolverConfig = SolverConfig(), kind: Optional[str] = None, *, check: bool = True) -> SolveReport:
    """Solve ``A x^{m-1} = b`` with the alternating scheme.

    Step ``k`` (from 0) is an Anderson step when ``(k + 1) % p == 0`` and a
    Richardson step otherwise. Differences are recorded from ``k = 2`` on.
    ``cfg.method == "tr"`` never takes an Anderson step.
    """
    A = as_tensor(A)
    b = np.asarray(b, dtype=np.float64)
    kind = kind or cfg.precond
    m = A.order
    x0 = cfg.initial_vector(A.dim)
    flags = check_problem(A, b, x0) if check else []
    method = "tr" if cfg.method == "tr" else "taar"
    per_iter = flops_per_iteration(method, m, A.dim, kind)
    t0 = time.perf_counter()

    P = build_preconditioner(A, kind)
    st = TaarState.start(A, b, P, x0, cfg.q)
    st.flags.extend(flags)
    res = float(np.linalg.norm(st.resid))
    scale = res if cfg.stopping_mode == "relative" and res > 0 else 1.0
    history = [res / scale]
    flops = [0]
    wall_ms = [0.0]
    nonpositive = bool(np.any(st.x <= 0))

    xm1_old = st.xm1
    r_old = st.r
    k = 0
    while history[-1] > cfg.tol and k < cfg.max_iter:
        st.k = k
        if k > 1:
            st.window.record(k, st.xm1 - xm1_old, st.r - r_old)
        xm1_old, r_old = st.xm1, st.r
        # a diverging run overflows; that is reported through the flags
        with np.errstate(over="ignore", invalid="ignore"):
            if method == "taar" and (k + 1) % cfg.p == 0:
                tar_step(A, b, P, st)
            else:
                tr_step(A, b, P, st)
            k += 1
            st.evaluate(A, b, P)
        history.append(float(np.linalg.norm(st.resid)) / scale)
        flops.append(k * per_iter)
        wall_ms.append(1000.0 * (time.perf_counter() - t0))
        if np.any(st.xm1 <= 0):
            nonpositive = True
            _flag(st, "nonpositive_iterate")
        if not np.isfinite(history[-1]):
            _flag(st, "diverged")
            break

    return SolveReport(
        method=method,
        converged=bool(history[-1] <= cfg.tol),
        iterations=k,
        residual_history=history,
        cumulative_flops=flops,
        wall_ms=wall_ms,
        wall_time_s=time.perf_counter() - t0,
        solution=st.x,
        nonpositive_iterate_flag=nonpositive,
        stopping_mode=cfg.stopping_mode,
        flags=st.flags,
        precond=kind,
    )


def aar_linear_solve(A, b, cfg: SolverConfig = SolverConfig(method="aar-linear"), precond: str = "jacobi") -> SolveReport:
    """Alternating Anderson-Richardson for ``A x = b`` with a Jacobi preconditioner.

    Written out step by step in the matrix setting, including the explicit
    modified residual ``M^{-1}(b - A x_bar)`` of the Anderson step.
    """
    if precond != "jacobi":
        raise ValueError("only the Jacobi preconditioner is available")
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = A.shape[0]
    d = np.diag(A).copy()
    if np.any(d == 0.0):
        raise ZeroDiagonalError("Jacobi preconditioner needs a nonzero diagonal")
    per_iter = flops_per_iteration("aar-linear", 2, n)
    t0 = time.perf_counter()
    flags = []

    x = cfg.initial_vector(n)
    res_vec = b - A @ x
    res = float(np.linalg.norm(res_vec))
    scale = res if cfg.stopping_mode == "relative" and res > 0 else 1.0
    history = [res / scale]
    flops = [0]
    wall_ms = [0.0]
    window = HistoryWindow(n, cfg.q)

    x_old = x
    r_old = None
    k = 0
    while history[-1] > cfg.tol and k < cfg.max_iter:
        r = res_vec / d
        if k > 1:
            window.record(k, x - x_old, r - r_old)
        x_old, r_old = x, r
        if (k + 1) % cfg.p != 0 or window.filled == 0:
            Ar = A @ r
            den = float(Ar @ Ar)
            if den < DEGENERATE_DENOM:
                if "degenerate_direction" not in flags:
                    flags.append("degenerate_direction")
                omega = 0.0
            else:
                omega = float(res_vec @ Ar) / den
            x = x + omega * r
        else:
            X, R = window.columns()
            gamma = lstsq_gamma(R, r)
            x_bar = x - X @ gamma
            res_bar = b - A @ x_bar
            r_bar = res_bar / d
            Ar_bar = A @ r_bar
            den = float(Ar_bar @ Ar_bar)
            if den < DEGENERATE_DENOM:
                if "degenerate_direction" not in flags:
                    flags.append("degenerate_direction")
                beta = 0.0
            else:
                beta = float(res_bar @ Ar_bar) / den
            x = x_bar + beta * r_bar
        k += 1
        res_vec = b - A @ x
        history.append(float(np.linalg.norm(res_vec)) / scale)
        flops.append(k * per_iter)
        wall_ms.append(1000.0 * (time.perf_counter() - t0))
        if not np.isfinite(history[-1]):
            flags.append("diverged")
            break

    return SolveReport(
        method="aar-linear",
        converged=bool(history[-1] <= cfg.tol),
        iterations=k,
        residual_history=history,
        cumulative_flops=flops,
        wall_ms=wall_ms,
        wall_time_s=time.perf_counter() - t0,
        solution=x,
        nonpositive_iterate_flag=False,
        stopping_mode=cfg.stopping_mode,
        flags=flags,
        precond="jacobi",
    )

"""Solver configuration and the per-run report shared by every method."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

METHODS = (
    "j1", "gs1", "j1sor", "gs1sor", "newton",
    "j2", "gs2", "j3", "gs3", "fullm",
    "tr", "taar", "aar-linear",
)
PRECONDITIONERS = ("pj", "pgs", "pf")


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls.

    ``x0=None`` means the all-0.1 vector. ``tol`` is relative to the initial
    residual norm unless ``stopping_mode == "absolute"``.
    """

    method: str = "taar"
    tol: float = 1e-8
    max_iter: int = 20000
    x0: Optional[np.ndarray] = None
    omega: Optional[float] = None
    p: int = 10
    q: int = 6
    stopping_mode: str = "relative"
    precond: str = "pf"

    def __post_init__(self):
        if self.method not in METHODS:
            from .errors import UnknownMethodError

            raise UnknownMethodError(f"unknown method {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.stopping_mode not in ("relative", "absolute"):
            raise ValueError(f"unknown stopping mode {self.stopping_mode!r}")
        if self.precond not in PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner {self.precond!r}")

    def initial_vector(self, n: int) -> np.ndarray:
        if self.x0 is None:
            return np.full(n, 0.1)
        x0 = np.asarray(self.x0, dtype=np.float64)
        if x0.shape != (n,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({n},)")
        return x0.copy()

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


@dataclass
class SolveReport:
    method: str
    converged: bool
    iterations: int
    residual_history: list
    cumulative_flops: list
    wall_time_s: float
    solution: np.ndarray
    nonpositive_iterate_flag: bool = False
    stopping_mode: str = "relative"
    flags: list = field(default_factory=list)
    precond: Optional[str] = None
    wall_ms: list = field(default_factory=list)  # elapsed time at each history entry

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    @property
    def total_flops(self) -> int:
        return self.cumulative_flops[-1]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "precond": self.precond,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "stopping_mode": self.stopping_mode,
            "total_flops": int(self.total_flops),
            "wall_time_s": self.wall_time_s,
            "nonpositive_iterate_flag": self.nonpositive_iterate_flag,
            "flags": list(self.flags),
            "solution": [float(v) for v in self.solution],
            "residual_history": [float(v) for v in self.residual_history],
            "cumulative_flops": [int(v) for v in self.cumulative_flops],
            "wall_ms": [float(v) for v in self.wall_ms],
        }

"""Small dense kernels: diagonal/triangular/LU solves, Anderson least squares,
and the scalar positive-root finder used by forward substitution."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import NoBracketError, SingularMatrixError, ZeroDiagonalError, ZeroPivotError

PINV_RCOND = 1e-12


def solve_diagonal(d, c) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if d.shape != c.shape:
        raise ValueError(f"length mismatch: {d.shape} vs {c.shape}")
    if np.any(d == 0.0):
        raise ZeroDiagonalError("diagonal has a zero entry")
    return c / d


def solve_lower_triangular(L, c) -> np.ndarray:
    """Forward substitution ``L y = c``; only the lower triangle of L is read."""
    L = np.asarray(L, dtype=np.float64)
    if np.any(np.diag(L) == 0.0):
        raise ZeroPivotError("lower triangular matrix has a zero pivot")
    return scipy.linalg.solve_triangular(L, c, lower=True, check_finite=False)


@dataclass(frozen=True)
class LUFactor:
    """Row-pivoted LU factorisation ``P A = L U`` of a square matrix."""

    n: int
    lu: np.ndarray
    piv: np.ndarray

    @classmethod
    def factor(cls, A) -> "LUFactor":
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"square matrix required, got shape {A.shape}")
        scale = np.abs(A).sum(axis=1).max() if A.size else 0.0
        with warnings.catch_warnings():
            # exact singularity is reported below as SingularMatrixError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
        if scale == 0.0 or np.min(np.abs(np.diag(lu))) < 1e-14 * scale:
            raise SingularMatrixError("matrix is numerically singular")
        return cls(A.shape[0], lu, piv)

    def solve(self, c) -> np.ndarray:
        return scipy.linalg.lu_solve((self.lu, self.piv), c, check_finite=False)

    def reconstruct(self):
        """Return ``(P, L, U)`` with ``P @ A == L @ U``."""
        L = np.tril(self.lu, -1) + np.eye(self.n)
        U = np.triu(self.lu)
        perm = np.arange(self.n)
        for i, p in enumerate(self.piv):
            perm[i], perm[p] = perm[p], perm[i]
        return np.eye(self.n)[perm], L, U


def lu_solve(A, c) -> np.ndarray:
    return LUFactor.factor(A).solve(c)


@dataclass(frozen=True)
class Pseudoinverse:
    """Moore-Penrose pseudoinverse with relative singular-value cutoff."""

    shape: tuple
    matrix: np.ndarray

    @classmethod
    def of(cls, A, rcond: float = PINV_RCOND) -> "Pseudoinverse":
        A = np.asarray(A, dtype=np.float64)
        return cls(A.shape, np.linalg.pinv(A, rcond=rcond))


def lstsq_gamma(R, r) -> np.ndarray:
    """Anderson mixing coefficients ``(R^T R)^+ R^T r``.

    Goes through the ``l x l`` normal equations on purpose; ``l`` is the
    history depth (a handful of columns), and the pseudoinverse makes
    collinear residual differences harmless.
    """
    R = np.asarray(R, dtype=np.float64)
    if R.ndim == 1:
        R = R[:, None]
    gram = R.T @ R
    return Pseudoinverse.of(gram).matrix @ (R.T @ r)


def positive_root(coeffs, target: float, bracket_hint: float = 1.0) -> float:
    """Positive ``t`` with ``sum_j coeffs[j] t**j == target``.

    Expands ``[0, hint * 2**j]`` until the sign changes, then runs
    Newton steps safeguarded by bisection. Raises ``NoBracketError`` if no
    sign change appears after 200 doublings.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    t, status = _kernels.positive_root(coeffs, float(target), float(bracket_hint))
    if status != _kernels.ROOT_OK:
        raise NoBracketError(f"no positive root bracket for target {target}")
    return float(t)

"""Analytic per-iteration operation counts.

Costs per operation:

* ``A x^{m-1}``:      ``m n^m - n``
* ``A x^{m-2}``:      ``(m-1) n^m - n^2``
* dense solve:         ``n^3`` (diagonal ``n``, triangular ``n^2``)

Each method is charged a fixed multiset of these per iteration. The TAAR
family is charged one ``A x^{m-2}`` and one preconditioner solve per step
whether the step is plain Richardson or Anderson-corrected; the residual
``A x^{m-1}`` is recovered as ``(A x^{m-2}) x`` and not charged.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownMethodError

# (count of A x^{m-1}, count of A x^{m-2}, solve kind or None)
_OPERATIONS = {
    "j1": (2, 0, None),
    "gs1": (2, 0, None),
    "j1sor": (2, 0, None),
    "gs1sor": (2, 0, None),
    "j2": (1, 1, None),
    "gs2": (1, 1, None),
    "j3": (2, 0, None),
    "gs3": (2, 0, None),
    "fullm": (2, 0, "full"),
    "newton": (0, 1, "full"),
    "tr": (0, 1, "precond"),
    "tar": (0, 1, "precond"),
    "taar": (0, 1, "precond"),
}

_PRECOND_SOLVE = {"pj": "diagonal", "pgs": "triangular", "pf": "full"}


@dataclass(frozen=True)
class FlopsModel:
    m: int
    n: int

    @property
    def apply_xm1(self) -> int:
        return self.m * self.n**self.m - self.n

    @property
    def apply_xm2(self) -> int:
        return (self.m - 1) * self.n**self.m - self.n**2

    def solve(self, kind: str) -> int:
        return {"diagonal": self.n, "triangular": self.n**2, "full": self.n**3}[kind]

    def per_iteration(self, method: str, precond: str = "pf") -> int:
        if method == "aar-linear":
            # two matrix-vector products plus the Jacobi scaling
            return 2 * self.n**2 + self.n
        try:
            n_xm1, n_xm2, solve = _OPERATIONS[method]
        except KeyError:
            raise UnknownMethodError(f"unknown method {method!r}") from None
        total = n_xm1 * self.apply_xm1 + n_xm2 * self.apply_xm2
        if solve == "full":
            total += self.solve("full")
        elif solve == "precond":
            total += self.solve(_PRECOND_SOLVE[precond])
        return total


def flops_per_iteration(method: str, m: int, n: int, precond: str = "pf") -> int:
    return FlopsModel(m, n).per_iteration(method, precond)

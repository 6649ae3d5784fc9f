"""Test problems: random M-tensors, the |sin| family, the gravity boundary
value problem and two small hard-coded appendix instances.

Random data comes from ``numpy.random.default_rng(seed)`` (PCG64), drawing the
tensor entries first (lexicographic order) and then ``b``. The default seed is
0 and can be overridden with the ``MTAAR_SEED`` environment variable.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .tensor import DenseTensor, frozen, identity_tensor

GRAVITY_G = 6.67e-11
EARTH_MASS = 5.98e24
EARTH_RADIUS = 6.37e6
STANDARD_GRAVITY = 9.8


def default_seed() -> int:
    return int(os.environ.get("MTAAR_SEED", "0"))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    A: DenseTensor
    b: np.ndarray
    x0: np.ndarray
    label: str
    known_meta: dict = field(default_factory=dict)
    stopping_mode: str = "relative"
    tol: Optional[float] = None

    @property
    def m(self) -> int:
        return self.A.order

    @property
    def n(self) -> int:
        return self.A.dim


def gen_random_mtensor(m: int, n: int, epsilon: float = 0.01, seed: Optional[int] = None) -> ProblemInstance:
    """``A = s I - B`` with ``B`` uniform on (0, 1) and ``s = (1 + eps) max_i (B e^{m-1})_i``.

    ``A e^{m-1} = s - rowsum(B) > 0`` makes ``e`` a positive certificate.
    """
    if m < 2 or n < 1:
        raise ValueError(f"invalid (m, n) = ({m}, {n})")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    seed = default_seed() if seed is None else seed
    rng = np.random.default_rng(seed)
    arr = rng.random((n,) * m)
    b = rng.random(n)
    rowsum = arr.reshape(n, -1).sum(axis=1)
    s = (1.0 + epsilon) * float(rowsum.max())
    np.negative(arr, out=arr)
    arr[(np.arange(n),) * m] += s
    return ProblemInstance(
        A=frozen(arr),
        b=b,
        x0=np.full(n, 0.1),
        label=f"random(m={m},n={n},eps={epsilon},seed={seed})",
        known_meta={"s": s, "epsilon": epsilon, "seed": seed, "probe": "ones"},
    )


def gen_sine_symmetric(n: int) -> ProblemInstance:
    """Order-3 ``A = n^2 I - B`` with ``B_ijk = |sin(i + j + k)|`` (1-based), ``b = e``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    vals = np.abs(np.sin(np.arange(3 * n + 1, dtype=np.float64)))
    i = np.arange(1, n + 1)
    jk = i[:, None] + i[None, :]
    arr = np.empty((n, n, n))
    for a in range(n):
        arr[a] = -vals[(a + 1) + jk]
    arr[(np.arange(n),) * 3] += float(n * n)
    return ProblemInstance(
        A=frozen(arr),
        b=np.ones(n),
        x0=np.full(n, 0.1),
        label=f"sine(n={n})",
        known_meta={"s": float(n * n), "probe": "ones"},
    )


def gen_gravity_bvp(
    n: int = 20,
    c0: float = EARTH_RADIUS,
    c1: float = EARTH_RADIUS,
    G: float = GRAVITY_G,
    Mmass: float = EARTH_MASS,
    scaled_x0: bool = False,
) -> ProblemInstance:
    """Order-4 discretisation of ``x'' = -G M / x^2`` on (0, 1), ``x(0)=c0, x(1)=c1``.

    Interior rows read ``2 x_i^3 - x_i^2 (x_{i-1} + x_{i+1}) = G M / (n-1)^2``.
    The probe ``e`` does not certify this tensor (interior rows of
    ``A e^3`` vanish). The boundary-fitted parabola sampled on the grid is a
    strictly positive probe that does; see :func:`gravity_probe`.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if not (c0 > 0 and c1 > 0):
        raise ValueError("boundary values must be positive")
    arr = np.zeros((n, n, n, n))
    arr[0, 0, 0, 0] = 1.0
    arr[n - 1, n - 1, n - 1, n - 1] = 1.0
    third = 1.0 / 3.0
    for i in range(1, n - 1):
        arr[i, i, i, i] = 2.0
        for j in (i - 1, i + 1):
            arr[i, j, i, i] = arr[i, i, j, i] = arr[i, i, i, j] = -third
    b = np.full(n, G * Mmass / (n - 1) ** 2)
    b[0] = c0**3
    b[-1] = c1**3
    x0 = np.full(n, c0) if scaled_x0 else np.full(n, 0.1)
    return ProblemInstance(
        A=frozen(arr),
        b=b,
        x0=x0,
        label=f"gravity(n={n})",
        known_meta={"c0": c0, "c1": c1, "G": G, "M": Mmass, "probe": "parabola"},
    )


def parabola(t, c0: float, c1: float, g: float = STANDARD_GRAVITY):
    """``-(g/2) t^2 + alpha t + beta`` through ``(0, c0)`` and ``(1, c1)``."""
    t = np.asarray(t, dtype=np.float64)
    beta = c0
    alpha = c1 - c0 + g / 2.0
    return -0.5 * g * t**2 + alpha * t + beta


# independent entries of the symmetric order-4, dimension-3 appendix tensor (1-based)
APPENDIX3_ENTRIES = {
    (1, 1, 1, 1): 20.4982,
    (1, 1, 1, 2): -0.0582,
    (1, 1, 1, 3): -1.1719,
    (1, 1, 2, 2): 0.2236,
    (1, 1, 2, 3): -0.0171,
    (1, 1, 3, 3): 0.4597,
    (1, 2, 2, 3): 0.1852,
    (1, 2, 2, 2): 0.4880,
    (1, 2, 3, 3): -0.4087,
    (1, 3, 3, 3): 0.7639,
    (2, 2, 2, 2): 10.0,
    (2, 2, 2, 3): -0.6162,
    (2, 2, 3, 3): 0.1519,
    (3, 3, 3, 3): 2.6311,
}


def appendix_problem3() -> ProblemInstance:
    """Symmetric order-4, 3-dimensional tensor with b = (1, 2, 3), x0 = e.

    Each listed value fills every permutation of its index multiset. The
    multiset {2, 3, 3, 3} is not listed and is zero. The tensor is not a
    Z-tensor (some off-diagonal entries are positive).
    """
    arr = np.zeros((3, 3, 3, 3))
    for idx, val in APPENDIX3_ENTRIES.items():
        for perm in set(itertools.permutations(idx)):
            arr[tuple(p - 1 for p in perm)] = val
    return ProblemInstance(
        A=frozen(arr),
        b=np.array([1.0, 2.0, 3.0]),
        x0=np.ones(3),
        label="appendix3",
        known_meta={"m_tensor": False},
    )


def appendix_example61(seed: Optional[int] = None) -> ProblemInstance:
    """Random (3, 5) M-tensor with eps = 1, b = x0 = e, absolute stopping at 1e-11."""
    base = gen_random_mtensor(3, 5, 1.0, seed)
    return ProblemInstance(
        A=base.A,
        b=np.ones(5),
        x0=np.ones(5),
        label=f"appendix61(seed={base.known_meta['seed']})",
        known_meta=dict(base.known_meta),
        stopping_mode="absolute",
        tol=1e-11,
    )


def identity_problem(m: int, b) -> ProblemInstance:
    b = np.asarray(b, dtype=np.float64)
    return ProblemInstance(identity_tensor(m, b.size), b, np.full(b.size, 0.1), f"identity(m={m})")


def gravity_probe(P: ProblemInstance) -> np.ndarray:
    meta = P.known_meta
    return parabola(np.linspace(0.0, 1.0, P.n), meta["c0"], meta["c1"])


def certify_with_probe(A: DenseTensor, probe) -> bool:
    """Certificate check using an explicit positive probe."""
    from .tensor import verify_nonsingular_m_tensor

    return verify_nonsingular_m_tensor(A, probe)

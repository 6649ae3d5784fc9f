"""Dense tensors and the products used by multilinear solvers.

A tensor of order ``m`` and dimension ``n`` is stored as a C-ordered
``(n,)*m`` float64 array, so the flat buffer is the lexicographic order
with the first index slowest. Vectors and matrices are plain numpy arrays.

Indices are 0-based everywhere in code; docstrings that quote entries
such as ``a_{111}`` use the usual 1-based mathematical notation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, InvalidDimensionError, ModeOutOfRangeError, NonpositiveProbeError

CERT_RTOL = 1e-12
PARTS = ("diagonal", "lower_triangular", "diagonal_face", "lower_half")


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Immutable order-``m``, dimension-``n`` real tensor.

    Parameters
    ----------
    array:
        Array of shape ``(n,)*m`` with ``m >= 2``. It is copied to a
        read-only float64 buffer.
    """

    array: np.ndarray

    def __post_init__(self):
        arr = self.array
        # a frozen float64 C buffer is adopted as is; anything else is copied
        if not (
            isinstance(arr, np.ndarray)
            and arr.dtype == np.float64
            and arr.flags.c_contiguous
            and not arr.flags.writeable
        ):
            arr = np.array(arr, dtype=np.float64, order="C", copy=True)
        if arr.ndim < 2:
            raise InvalidDimensionError(f"tensor order must be >= 2, got {arr.ndim}")
        n = arr.shape[0]
        if n < 1 or any(s != n for s in arr.shape):
            raise InvalidDimensionError(f"tensor must be cubical, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "array", arr)

    @classmethod
    def from_flat(cls, m: int, n: int, data) -> "DenseTensor":
        data = np.asarray(data, dtype=np.float64)
        if m < 2 or n < 1:
            raise InvalidDimensionError(f"invalid (m, n) = ({m}, {n})")
        if data.size != n**m:
            raise InvalidDimensionError(f"expected {n**m} entries for (m, n) = ({m}, {n}), got {data.size}")
        return cls(data.reshape((n,) * m))

    @property
    def order(self) -> int:
        return self.array.ndim

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Flat lexicographic view (read-only)."""
        return self.array.reshape(-1)

    def __repr__(self):
        return f"DenseTensor(order={self.order}, dim={self.dim})"

    def __neg__(self):
        return DenseTensor(-self.array)

    def allclose(self, other: "DenseTensor", **kw) -> bool:
        return self.array.shape == other.array.shape and np.allclose(self.array, other.array, **kw)


def as_tensor(A) -> DenseTensor:
    return A if isinstance(A, DenseTensor) else DenseTensor(A)


def _check_vector(A: DenseTensor, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.dim:
        raise DimensionMismatchError(f"vector of length {x.shape} does not match tensor dimension {A.dim}")
    return x


def identity_tensor(m: int, n: int) -> DenseTensor:
    """The identity tensor: ones on the superdiagonal ``i1 = ... = im``."""
    if m < 2 or n < 1:
        raise InvalidDimensionError(f"invalid (m, n) = ({m}, {n})")
    arr = np.zeros((n,) * m)
    arr[(np.arange(n),) * m] = 1.0
    return DenseTensor(arr)


def mode_product(A: DenseTensor, k: int, x) -> Union[DenseTensor, np.ndarray]:
    """k-mode product ``A ×_k x`` for ``k`` in ``2..m`` (1-based, as in the math).

    Sums out index ``k`` against ``x``. The result has order ``m - 1``; for an
    order-2 input this is a plain vector.
    """
    A = as_tensor(A)
    x = _check_vector(A, x)
    if not 2 <= k <= A.order:
        raise ModeOutOfRangeError(f"mode {k} outside 2..{A.order}")
    out = np.tensordot(A.array, x, axes=([k - 1], [0]))
    return out if out.ndim < 2 else DenseTensor(out)


def apply_xm1(A: DenseTensor, x) -> np.ndarray:
    """The vector ``A x^{m-1}``: component i is sum a_{i i2..im} x_{i2}..x_{im}."""
    A = as_tensor(A)
    x = _check_vector(A, x)
    return np.asarray(_kernels.contract(A.data, A.dim, x, A.order - 1))


def apply_xm2(A: DenseTensor, x) -> np.ndarray:
    """The ``n x n`` matrix ``A x^{m-2}``; for order 2 this is A itself."""
    A = as_tensor(A)
    x = _check_vector(A, x)
    n = A.dim
    return np.asarray(_kernels.contract(A.data, n, x, A.order - 2)).reshape(n, n)


def majorization_indices(m: int, n: int) -> np.ndarray:
    """Flat offsets of the entries ``(i, j, j, ..., j)`` as an ``n x n`` array."""
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    tail = sum(n**p for p in range(m - 1))  # offset of (j,...,j) within a row
    return i * n ** (m - 1) + j * tail


def majorization_matrix(A: DenseTensor) -> np.ndarray:
    """``M(A)`` with entries ``M_ij = a_{ij...j}``."""
    A = as_tensor(A)
    return A.data[majorization_indices(A.order, A.dim)].copy()


def _part_mask(m: int, n: int, part: str) -> np.ndarray:
    idx = np.indices((n,) * m, sparse=True)
    i1 = idx[0]
    if part == "diagonal":
        mask = np.ones((n,) * m, dtype=bool)
        for other in idx[1:]:
            mask = mask & (other == i1)
    elif part == "lower_triangular":
        mask = np.ones((n,) * m, dtype=bool)
        for other in idx[1:]:
            mask = mask & (other <= i1)
    elif part == "diagonal_face":
        mask = np.broadcast_to(idx[1] == i1, (n,) * m)
    elif part == "lower_half":
        mask = np.broadcast_to(idx[1] <= i1, (n,) * m)
    else:
        raise ValueError(f"unknown part {part!r}; expected one of {PARTS}")
    return mask


def extract_part(A: DenseTensor, part: str) -> DenseTensor:
    """Keep the entries admitted by ``part`` and zero the rest.

    ``part`` is one of ``diagonal`` (i1=...=im), ``lower_triangular``
    (i2..im <= i1), ``diagonal_face`` (i1=i2) or ``lower_half`` (i2 <= i1).
    """
    A = as_tensor(A)
    mask = _part_mask(A.order, A.dim, part)
    return DenseTensor(np.where(mask, A.array, 0.0))


def diagonal_entries(A: DenseTensor) -> np.ndarray:
    A = as_tensor(A)
    n = A.dim
    return A.array[(np.arange(n),) * A.order].copy()


def is_z_tensor(A: DenseTensor) -> bool:
    """True iff every off-diagonal entry is nonpositive."""
    A = as_tensor(A)
    # slab by slab keeps peak memory at n^(m-1) extra entries
    for i in range(A.dim):
        slab = A.array[i].copy()
        slab[(i,) * (A.order - 1)] = 0.0
        if slab.max() > 0.0:
            return False
    return True


def verify_nonsingular_m_tensor(A: DenseTensor, probe=None) -> bool:
    """Positive-probe certificate: Z-tensor and ``A probe^{m-1} > 0``.

    A ``True`` answer proves nonsingularity; ``False`` only means this
    particular probe does not certify it. A component only counts as positive
    when it exceeds ``CERT_RTOL`` times ``|A| probe^{m-1}``, so sums that
    cancel to rounding noise do not certify anything.
    """
    A = as_tensor(A)
    probe = np.ones(A.dim) if probe is None else _check_vector(A, probe)
    if not np.all(probe > 0):
        raise NonpositiveProbeError("probe vector must be strictly positive")
    if not is_z_tensor(A):
        return False
    values = apply_xm1(A, probe)
    return bool(np.all(values > CERT_RTOL * _abs_xm1(A, probe)))


def _abs_xm1(A: DenseTensor, x) -> np.ndarray:
    """``|A| x^{m-1}`` computed one slab at a time."""
    out = np.empty(A.dim)
    for i in range(A.dim):
        v = np.abs(A.array[i]).reshape(-1)
        for _ in range(A.order - 1):
            v = v.reshape(-1, A.dim) @ x
        out[i] = v.item()
    return out


def elementwise_pow(x, p: float) -> np.ndarray:
    """Componentwise power ``x^[p]``.

    Integer exponents use repeated multiplication, which rounds exactly like
    contracting the identity tensor. Other exponents use the real,
    sign-preserving branch ``sign(v) * |v|**p`` so odd roots of negatives
    stay real.
    """
    x = np.asarray(x, dtype=np.float64)
    if float(p).is_integer():
        k = int(p)
        out = np.ones_like(x)
        for _ in range(abs(k)):
            out = out * x
        return out if k >= 0 else 1.0 / out
    return np.sign(x) * np.abs(x) ** p


def is_symmetric(A: DenseTensor, atol: float = 1e-12) -> bool:
    """Entry values invariant under every permutation of indices."""
    A = as_tensor(A)
    arr = A.array
    m = A.order
    # adjacent transpositions generate the symmetric group; compare slab by slab
    for k in range(m - 1):
        for i in range(A.dim):
            slab = arr[i]
            other = arr[:, i] if k == 0 else np.swapaxes(slab, k - 1, k)
            if np.max(np.abs(slab - other)) > atol:
                return False
    return True


def frozen(arr: np.ndarray) -> DenseTensor:
    """Wrap a freshly built float64 array without copying it."""
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return DenseTensor(arr)


def power_difference_factor(y, z, m: int) -> np.ndarray:
    """``sum_{j=0}^{m-2} y^[m-2-j] .* z^[j]``.

    Multiplying by ``y - z`` gives ``y^[m-1] - z^[m-1]``; replacing ``y`` by
    ``z`` in every term gives ``(m-1) z^[m-2]``, the linearisation used to
    turn a change in ``x^[m-1]`` into a change in ``x``.
    """
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if m < 2:
        raise ValueError("m must be >= 2")
    out = np.zeros(np.broadcast(y, z).shape)
    for j in range(m - 1):
        out += y ** (m - 2 - j) * z**j
    return out

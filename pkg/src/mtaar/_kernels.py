"""Hot inner loops, compiled with numba when available.

Every kernel exists twice: a ``numba`` version (``@njit``) and a pure-numpy
version. The active pair is chosen once at import time. Set the environment
variable ``MTAAR_DISABLE_NUMBA=1`` to force the numpy path (useful for
debugging and for the benchmark in ``benchmarks/bench_kernels.py``).

All kernels operate on flat C-ordered float64 buffers of length ``n**m``.
"""
import math
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_DISABLED = os.environ.get("MTAAR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

ROOT_OK = 0
ROOT_NO_BRACKET = 1
MAX_DOUBLINGS = 200
# Newton stops once a step moves t by less than a few ulps
STEP_RTOL = 4.0 * np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def contract_np(flat, n, x, times):
    """Contract the trailing index ``times`` times against ``x``."""
    out = flat
    for _ in range(times):
        out = out.reshape(-1, n) @ x
    return out


def poly_eval_np(coeffs, t):
    val = 0.0
    for c in coeffs[::-1]:
        val = val * t + c
    return val


def positive_root_np(coeffs, target, hint):
    deg = len(coeffs) - 1
    dcoeffs = [coeffs[j] * j for j in range(1, deg + 1)]
    f0 = poly_eval_np(coeffs, 0.0) - target
    hi = hint if hint > 0.0 and math.isfinite(hint) else 1.0
    fhi = poly_eval_np(coeffs, hi) - target
    found = False
    for _ in range(MAX_DOUBLINGS + 1):
        if (f0 < 0.0 < fhi) or (f0 > 0.0 > fhi):
            found = True
            break
        if fhi == 0.0:
            return hi, ROOT_OK
        hi *= 2.0
        fhi = poly_eval_np(coeffs, hi) - target
    if not found:
        return math.nan, ROOT_NO_BRACKET

    lo, flo = 0.0, f0
    t = 0.5 * (lo + hi)
    best_t, best_f = hi, abs(fhi)
    for _ in range(400):
        ft = poly_eval_np(coeffs, t) - target
        if abs(ft) < best_f:
            best_t, best_f = t, abs(ft)
        if ft == 0.0:
            return t, ROOT_OK
        if (ft < 0.0) == (flo < 0.0):
            lo, flo = t, ft
        else:
            hi = t
        dft = poly_eval_np(dcoeffs, t) if deg > 0 else 0.0
        newton = t - ft / dft if dft != 0.0 else math.nan
        if lo < newton < hi:
            if abs(newton - t) <= STEP_RTOL * t:
                return newton, ROOT_OK
            t = newton
        else:
            t = 0.5 * (lo + hi)
        if hi - lo <= STEP_RTOL * hi:
            break
    return best_t, ROOT_OK


def _row_poly_coeffs_np(data, n, m, i, y):
    """Coefficients of t -> (A x^{m-1})_i where x = (y_0..y_{i-1}, t, *)."""
    sub = data.reshape((n,) * m)[(i,) + (slice(0, i + 1),) * (m - 1)]
    y0 = np.array(y[: i + 1], dtype=float)
    y0[i] = 0.0
    # poly[d] is the coefficient tensor of t**d
    poly = [np.ascontiguousarray(sub)]
    for _ in range(m - 1):
        nxt = [p @ y0 for p in poly] + [0.0]
        for d, p in enumerate(poly):
            nxt[d + 1] = nxt[d + 1] + p[..., i]
        poly = nxt
    return np.array([float(np.sum(p)) for p in poly])


def triangular_sweep_np(data, n, m, rhs, x, diag_shift, out):
    """Forward substitution for a lower triangular tensor equation.

    Solves ``(L - shift*I) y^{m-1} = rhs`` row by row using the entries
    ``data[i, j2..jm]`` with all ``j <= i`` (the lower triangular part).
    ``x`` supplies the bracket hints. Returns the index of the first failed
    row, or -1.
    """
    for i in range(n):
        c = _row_poly_coeffs_np(data, n, m, i, out)
        c[m - 1] -= diag_shift
        t, status = positive_root_np(c, rhs[i], x[i])
        if status != ROOT_OK:
            return i
        out[i] = t
    return -1


def numpy_kernels():
    return {
        "contract": contract_np,
        "positive_root": positive_root_np,
        "triangular_sweep": triangular_sweep_np,
    }


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def contract_nb(flat, n, x, times):
        # each pass is a (rows x n) matrix-vector product; numba hands ``@``
        # to BLAS, so a hand-written loop here would only be slower
        if times == 0:
            return flat.copy()
        cur = flat.reshape(flat.size // n, n) @ x
        for _ in range(times - 1):
            cur = cur.reshape(cur.size // n, n) @ x
        return cur

    @njit(cache=True)
    def _poly_eval_nb(coeffs, t):
        val = 0.0
        for j in range(coeffs.size - 1, -1, -1):
            val = val * t + coeffs[j]
        return val

    @njit(cache=True)
    def _dpoly_eval_nb(coeffs, t):
        val = 0.0
        for j in range(coeffs.size - 1, 0, -1):
            val = val * t + j * coeffs[j]
        return val

    @njit(cache=True)
    def positive_root_nb(coeffs, target, hint):
        f0 = _poly_eval_nb(coeffs, 0.0) - target
        hi = hint if (hint > 0.0 and np.isfinite(hint)) else 1.0
        fhi = _poly_eval_nb(coeffs, hi) - target
        found = False
        for _ in range(MAX_DOUBLINGS + 1):
            if (f0 < 0.0 and fhi > 0.0) or (f0 > 0.0 and fhi < 0.0):
                found = True
                break
            if fhi == 0.0:
                return hi, ROOT_OK
            hi *= 2.0
            fhi = _poly_eval_nb(coeffs, hi) - target
        if not found:
            return np.nan, ROOT_NO_BRACKET

        lo = 0.0
        flo = f0
        t = 0.5 * (lo + hi)
        best_t = hi
        best_f = abs(fhi)
        for _ in range(400):
            ft = _poly_eval_nb(coeffs, t) - target
            if abs(ft) < best_f:
                best_t = t
                best_f = abs(ft)
            if ft == 0.0:
                return t, ROOT_OK
            if (ft < 0.0) == (flo < 0.0):
                lo = t
                flo = ft
            else:
                hi = t
            dft = _dpoly_eval_nb(coeffs, t)
            if dft != 0.0:
                newton = t - ft / dft
            else:
                newton = np.nan
            if lo < newton < hi:
                if abs(newton - t) <= STEP_RTOL * t:
                    return newton, ROOT_OK
                t = newton
            else:
                t = 0.5 * (lo + hi)
            if hi - lo <= STEP_RTOL * hi:
                break
        return best_t, ROOT_OK

    @njit(cache=True)
    def _row_poly_coeffs_nb(data, n, m, i, y, coeffs):
        # walk the multi-index (j2..jm) over [0, i]^{m-1} like an odometer
        for d in range(m):
            coeffs[d] = 0.0
        k = m - 1
        idx = np.zeros(k, dtype=np.int64)
        row_base = i * n ** k
        strides = np.empty(k, dtype=np.int64)
        s = 1
        for p in range(k - 1, -1, -1):
            strides[p] = s
            s *= n
        while True:
            off = row_base
            prod = 1.0
            deg = 0
            for p in range(k):
                off += idx[p] * strides[p]
                if idx[p] == i:
                    deg += 1
                else:
                    prod *= y[idx[p]]
            coeffs[deg] += data[off] * prod
            p = k - 1
            while p >= 0:
                idx[p] += 1
                if idx[p] <= i:
                    break
                idx[p] = 0
                p -= 1
            if p < 0:
                break

    @njit(cache=True)
    def triangular_sweep_nb(data, n, m, rhs, x, diag_shift, out):
        coeffs = np.empty(m)
        for i in range(n):
            _row_poly_coeffs_nb(data, n, m, i, out, coeffs)
            coeffs[m - 1] -= diag_shift
            t, status = positive_root_nb(coeffs, rhs[i], x[i])
            if status != ROOT_OK:
                return i
            out[i] = t
        return -1

    def numba_kernels():
        return {
            "contract": contract_nb,
            "positive_root": positive_root_nb,
            "triangular_sweep": triangular_sweep_nb,
        }


if HAS_NUMBA and not _DISABLED:
    BACKEND = "numba"
    _ACTIVE = numba_kernels()
else:
    BACKEND = "numpy"
    _ACTIVE = numpy_kernels()

contract = _ACTIVE["contract"]
positive_root = _ACTIVE["positive_root"]
triangular_sweep = _ACTIVE["triangular_sweep"]

"""Compare the numba kernels with the pure-numpy fallback.

Two measurements:

* kernel level: ``contract`` (used by ``A x^{m-1}`` and ``A x^{m-2}``) and
  ``triangular_sweep`` (GS1 forward substitution), called directly through
  ``numpy_kernels()`` and ``numba_kernels()`` in this process;
* end to end: ``mtaar solve`` per backend in a fresh interpreter (the numpy
  run with ``MTAAR_DISABLE_NUMBA=1``), timed by the solver's own wall clock.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--skip-solve]
"""
import argparse
import json
import os
import subprocess
import sys
import tempfile
import timeit

import numpy as np

from mtaar import _kernels
from mtaar.problems import gen_random_mtensor

CONTRACT_CASES = ((3, 50), (3, 100), (4, 30), (5, 12))
SWEEP_CASES = ((3, 30), (4, 12))
SOLVE_CASES = (
    ("taar", 3, 100),
    ("j1", 3, 50),
    ("gs1", 3, 20),
)


def best_of(fn, repeat: int, number: int) -> float:
    """Best per-call time in milliseconds."""
    return 1000.0 * min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_contract(kernels: dict, repeat: int) -> list:
    rows = []
    for m, n in CONTRACT_CASES:
        P = gen_random_mtensor(m, n, 0.01, 0)
        x = np.random.default_rng(0).random(n)
        flat = P.A.data
        for backend, k in kernels.items():
            fn = k["contract"]
            fn(flat, n, x, m - 1)  # warm-up (JIT compile)
            number = max(1, int(2e7 // n**m))
            ms = best_of(lambda: fn(flat, n, x, m - 1), repeat, number)
            rows.append(("contract", f"({m},{n})", backend, ms))
    return rows


def bench_sweep(kernels: dict, repeat: int) -> list:
    rows = []
    for m, n in SWEEP_CASES:
        P = gen_random_mtensor(m, n, 0.01, 0)
        rhs = np.random.default_rng(1).uniform(0.5, 1.5, n)
        hint = np.full(n, 0.1)
        for backend, k in kernels.items():
            fn = k["triangular_sweep"]
            out = np.zeros(n)
            fn(P.A.data, n, m, rhs, hint, 0.0, out)
            ms = best_of(lambda: fn(P.A.data, n, m, rhs, hint, 0.0, out), repeat, 3)
            rows.append(("triangular_sweep", f"({m},{n})", backend, ms))
    return rows


def bench_solve(repeat: int, tmpdir: str) -> list:
    """Solver wall time from the JSON report, so interpreter and numba start-up are excluded."""
    rows = []
    for method, m, n in SOLVE_CASES:
        for backend, flag in (("numba", "0"), ("numpy", "1")):
            out = os.path.join(tmpdir, f"{method}_{backend}")
            argv = [sys.executable, "-m", "mtaar.cli", "solve", "--problem", "random",
                    "--m", str(m), "--n", str(n), "--method", method, "--out", out]
            env = dict(os.environ, MTAAR_DISABLE_NUMBA=flag)
            times = []
            for _ in range(repeat):
                subprocess.run(argv, env=env, check=True, capture_output=True)
                with open(out + ".json") as fh:
                    times.append(json.load(fh)["wall_time_s"])
            rows.append((f"solve {method}", f"({m},{n})", backend, 1000.0 * min(times)))
    return rows


def print_table(rows: list) -> None:
    print(f"{'operation':<18}{'(m,n)':<10}{'backend':<8}{'best ms':>12}{'speedup':>10}")
    by_key = {}
    for op, case, backend, ms in rows:
        by_key.setdefault((op, case), {})[backend] = ms
    for (op, case), res in by_key.items():
        for backend, ms in res.items():
            speed = res["numpy"] / ms if backend == "numba" and "numpy" in res else 1.0
            print(f"{op:<18}{case:<10}{backend:<8}{ms:>12.3f}{speed:>9.1f}x")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-solve", action="store_true", help="only time the kernels")
    args = parser.parse_args(argv)

    if not _kernels.HAS_NUMBA:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1
    kernels = {"numba": _kernels.numba_kernels(), "numpy": _kernels.numpy_kernels()}
    rows = bench_contract(kernels, args.repeat) + bench_sweep(kernels, args.repeat)
    if not args.skip_solve:
        with tempfile.TemporaryDirectory() as tmpdir:
            rows += bench_solve(max(1, args.repeat // 2), tmpdir)
    print_table(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Reusable acceptance checks.

Each ``check_*`` function returns a :class:`CheckResult` with a one-line
detail string. :func:`run_all` is what ``mtaar verify --suite acceptance`` and
``tests/test_acceptance.py`` call.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bench
from .config import SolverConfig
from .flops import flops_per_iteration
from .problems import default_seed, gen_gravity_bvp, gen_random_mtensor, parabola
from .solvers import solve
from .splitting import solve_j1, solve_j3
from .taar import aar_linear_solve, taar_solve
from .tensor import (
    apply_xm1,
    apply_xm2,
    as_tensor,
    elementwise_pow,
    majorization_matrix,
    power_difference_factor,
)

EXP1_DESK = ((3, 50), (3, 100), (4, 20), (5, 10))
BASELINES_ACCEL = ("j1", "j2", "gs2", "gs3", "fullm")
BASELINES_FLOPS = ("j1", "j1sor", "j2", "gs2", "gs3", "fullm")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(name: str, fn: Callable) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


# 1 -------------------------------------------------------------------------
def check_sine_suite():
    rows, _ = bench.run_suite("table4")
    taar = [r["iter"] for r in rows if r["method"] == "taar"]
    newton = [r["iter"] for r in rows if r["method"] == "newton"]
    return all(r["pass"] for r in rows), f"TAAR-PF {taar}, Newton {newton}"


# 2 -------------------------------------------------------------------------
def check_appendix3():
    rows, _ = bench.run_suite("table5")
    return all(r["pass"] for r in rows), ", ".join(f"{r['method']}={r['iter']}" for r in rows)


# 3 -------------------------------------------------------------------------
def check_appendix61():
    rows, _ = bench.run_suite("table6")
    return all(r["pass"] for r in rows), ", ".join(f"{r['method']}={r['iter']}" for r in rows)


# 4 -------------------------------------------------------------------------
def check_acceleration(cases=EXP1_DESK, seed=None):
    seed = default_seed() if seed is None else seed
    ok = True
    parts = []
    for m, n in cases:
        P = gen_random_mtensor(m, n, 0.01, seed)
        t = solve(P.A, P.b, SolverConfig(method="taar"))
        base = {meth: solve(P.A, P.b, SolverConfig(method=meth)) for meth in BASELINES_ACCEL}
        case_ok = t.converged and t.iterations <= 30
        case_ok = case_ok and all(r.converged and r.iterations >= 10 * t.iterations for r in base.values())
        ok = ok and case_ok
        taar_txt = f"{t.iterations}" if t.converged else f"no convergence after {t.iterations}"
        worst = min(r.iterations for r in base.values())
        parts.append(f"({m},{n}) TAAR {taar_txt}, min baseline {worst} [{'ok' if case_ok else 'FAIL'}]")
    return ok, "; ".join(parts)


# 5 -------------------------------------------------------------------------
def check_flops_dominance(m=3, n=100, seed=None):
    seed = default_seed() if seed is None else seed
    P = gen_random_mtensor(m, n, 0.01, seed)
    t = solve(P.A, P.b, SolverConfig(method="taar"))
    ok = t.converged
    parts = [f"TAAR {t.total_flops:.3g}"]
    for meth in BASELINES_FLOPS:
        r = solve(P.A, P.b, SolverConfig(method=meth))
        ok = ok and r.converged and r.total_flops > t.total_flops
        parts.append(f"{meth} {r.total_flops:.3g}")
    return ok, "flops to 1e-8: " + ", ".join(parts)


# 6 -------------------------------------------------------------------------
def prop_telescoping(trials=1000, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(1, 8))
        y = rng.uniform(0.05, 3.0, n)
        z = rng.uniform(0.05, 3.0, n)
        lhs = elementwise_pow(y, m - 1) - elementwise_pow(z, m - 1)
        rhs = (y - z) * power_difference_factor(y, z, m)
        scale = np.maximum(np.abs(elementwise_pow(y, m - 1)), np.abs(elementwise_pow(z, m - 1)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst <= 1e-10, f"max rel err {worst:.2e}"


def prop_j1_j3_identity(steps=15, seed=3):
    P = gen_random_mtensor(3, 6, 0.1, seed)
    worst = 0.0
    for k in range(1, steps + 1):
        a = solve_j1(P.A, P.b, SolverConfig(method="j1", max_iter=k, tol=1e-300))
        c = solve_j3(P.A, P.b, SolverConfig(method="j3", max_iter=k, tol=1e-300))
        worst = max(worst, float(np.max(np.abs(a.solution - c.solution))))
    return worst <= 1e-12, f"max iterate diff {worst:.2e} over {steps} steps"


_AGREE_METHODS = ("j1", "gs1", "j1sor", "j2", "gs2", "j3", "gs3", "fullm")


def cross_method_runs(count=20, seed=11):
    """Solve ``count`` small random instances with every applicable method."""
    rng = np.random.default_rng(seed)
    runs = []
    for i in range(count):
        m = int(rng.integers(3, 5))
        n = int(rng.integers(3, 11))
        P = gen_random_mtensor(m, n, 0.5, int(rng.integers(0, 2**31)))
        reports = {}
        for meth in _AGREE_METHODS:
            reports[meth] = solve(P.A, P.b, SolverConfig(method=meth, tol=1e-13))
        for pc in ("pj", "pgs", "pf"):
            reports["taar-" + pc] = taar_solve(P.A, P.b, SolverConfig(method="taar", precond=pc, tol=1e-13))
        runs.append((P, reports))
    return runs


def prop_cross_agreement(runs):
    worst = 0.0
    missing = []
    for P, reps in runs:
        ref = reps["fullm"]
        if not ref.converged:
            missing.append(f"{P.label}:fullm")
            continue
        for name, r in reps.items():
            if not r.converged:
                missing.append(f"{P.label}:{name}")
                continue
            worst = max(worst, float(np.max(np.abs(r.solution - ref.solution)) / np.max(np.abs(ref.solution))))
    ok = worst <= 1e-6 and not missing
    detail = f"max rel diff {worst:.2e}"
    if missing:
        detail += f"; not converged: {', '.join(missing)}"
    return ok, detail


def prop_positive_certified(runs):
    bad = []
    count = 0
    for P, reps in runs:
        init = float(np.linalg.norm(P.b - apply_xm1(P.A, np.full(P.n, 0.1))))
        for name, r in reps.items():
            if not r.converged:
                continue
            count += 1
            res = float(np.linalg.norm(P.b - apply_xm1(P.A, r.solution))) / init
            if not (np.all(r.solution > 0) and res <= 1e-13 * (1 + 1e-6)):
                bad.append(f"{P.label}:{name}")
    return not bad, f"{count} converged solutions checked" + (f"; bad: {bad}" if bad else "")


def prop_xm2_xm1(trials=50, seed=5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(1, 7))
        A = as_tensor(rng.standard_normal((n,) * m))
        x = rng.standard_normal(n)
        a = apply_xm2(A, x) @ x
        c = apply_xm1(A, x)
        scale = max(1.0, float(np.max(np.abs(c))))
        worst = max(worst, float(np.max(np.abs(a - c))) / scale)
    return worst <= 1e-12, f"max rel diff {worst:.2e}"


def example_tensor3() -> np.ndarray:
    """3x3x3 tensor with ``a_ijk = 1 + 3(i-1) + (j-1) + 9(k-1)`` (1-based)."""
    i, j, k = np.meshgrid(np.arange(3), np.arange(3), np.arange(3), indexing="ij")
    return (1.0 + 3 * i + j + 9 * k).astype(np.float64)


def prop_majorization():
    got = majorization_matrix(as_tensor(example_tensor3()))
    want = np.array([[1.0, 11.0, 21.0], [4.0, 14.0, 24.0], [7.0, 17.0, 27.0]])
    return bool(np.array_equal(got, want)), f"M(A) rows {got.tolist()}"


def prop_m2_reduction(n=12, steps=25, seed=2):
    P = gen_random_mtensor(2, n, 0.2, seed)
    M = np.asarray(P.A.array)
    worst = 0.0
    for k in range(1, steps + 1):
        cfg = SolverConfig(method="taar", precond="pj", max_iter=k, tol=1e-300)
        t = taar_solve(P.A, P.b, cfg)
        a = aar_linear_solve(M, P.b, cfg.with_(method="aar-linear"))
        worst = max(worst, float(np.max(np.abs(t.solution - a.solution))))
    return worst <= 1e-10, f"max iterate diff {worst:.2e} over {steps} steps"


FLOPS_TABLE = {
    (3, 2): {"j1": 44, "fullm": 52, "j2": 34, "taar-pf": 20, "taar-pj": 14, "taar-pgs": 16, "gs3": 44},
    (4, 3): {"j1": 642, "fullm": 669, "j2": 555, "taar-pf": 261, "taar-pj": 237, "taar-pgs": 243, "gs3": 642},
}


def prop_flops_table():
    bad = []
    for (m, n), expected in FLOPS_TABLE.items():
        for key, want in expected.items():
            method, _, pc = key.partition("-")
            got = flops_per_iteration(method, m, n, pc or "pf")
            if got != want:
                bad.append(f"{key}({m},{n})={got}!={want}")
    return not bad, "all match" if not bad else "; ".join(bad)


def check_properties():
    runs = cross_method_runs()
    parts = {
        "a": prop_telescoping(),
        "b": prop_j1_j3_identity(),
        "c": prop_cross_agreement(runs),
        "d": prop_positive_certified(runs),
        "e": prop_xm2_xm1(),
        "f": prop_majorization(),
        "g": prop_m2_reduction(),
        "h": prop_flops_table(),
    }
    ok = all(p[0] for p in parts.values())
    return ok, "; ".join(f"({k}) {'ok' if v[0] else 'FAIL'} {v[1]}" for k, v in parts.items())


# 7 -------------------------------------------------------------------------
def check_gravity(n=20):
    P = gen_gravity_bvp(n)
    r = solve(P.A, P.b, SolverConfig(method="taar", x0=P.x0))
    meta = P.known_meta
    curve = parabola(np.linspace(0.0, 1.0, n), meta["c0"], meta["c1"])
    err = float(np.max(np.abs(r.solution - curve)) / meta["c0"])
    ok = r.converged and err <= 1e-2
    return ok, (
        f"converged={r.converged} after {r.iterations} iterations, "
        f"relative residual {r.final_residual:.2e}, parabola err {err:.2e}"
    )


CRITERIA = (
    ("1 sine suite", check_sine_suite),
    ("2 symmetric order-4 problem", check_appendix3),
    ("3 eps=1 (3,5) instance", check_appendix61),
    ("4 order-of-magnitude acceleration", check_acceleration),
    ("5 flops dominance", check_flops_dominance),
    ("6 property suite", check_properties),
    ("7 gravity BVP", check_gravity),
)


def run_all(echo: Callable = None) -> list:
    results = []
    for name, fn in CRITERIA:
        res = _timed(name, fn)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results

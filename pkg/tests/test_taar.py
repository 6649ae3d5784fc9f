import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mtaar import SolverConfig
from mtaar.linalg import lu_solve
from mtaar.problems import gen_random_mtensor, gen_sine_symmetric, identity_problem
from mtaar.splitting import solve_fullm
from mtaar.taar import (
    HistoryWindow,
    TaarState,
    aar_linear_solve,
    build_preconditioner,
    residual,
    taar_solve,
    tar_step,
    tr_step,
)
from mtaar.tensor import apply_xm1, elementwise_pow, identity_tensor, majorization_matrix


class TestPreconditioner:
    def test_pgs_example(self, example3):
        assert_array_equal(build_preconditioner(example3, "pgs").matrix, [[1, 0, 0], [4, 14, 0], [7, 17, 27]])

    def test_pf_example(self, example3):
        assert_array_equal(build_preconditioner(example3, "pf").matrix, [[1, 11, 21], [4, 14, 24], [7, 17, 27]])

    @pytest.mark.parametrize("kind", ["pj", "pgs", "pf"])
    def test_identity(self, kind):
        assert_array_equal(build_preconditioner(identity_tensor(3, 4), kind).matrix, np.eye(4))

    def test_structure(self):
        P = gen_random_mtensor(3, 6, 0.1, 0)
        pj = build_preconditioner(P.A, "pj").matrix
        pgs = build_preconditioner(P.A, "pgs").matrix
        for M in (pj, pgs, build_preconditioner(P.A, "pf").matrix):
            assert np.all(np.diag(M) > 0)
        assert_array_equal(pj, np.diag(np.diag(pj)))
        assert_array_equal(pgs, np.tril(pgs))

    def test_pf_inverse_positive(self):
        for seed in range(10):
            P = gen_random_mtensor(int(3 + seed % 2), 4 + seed % 9, 0.05, seed)
            inv = np.linalg.inv(majorization_matrix(P.A))
            assert inv.min() >= -1e-10

    def test_unknown_kind(self, example3):
        with pytest.raises(ValueError):
            build_preconditioner(example3, "ilu")


class TestResidual:
    def test_at_solution(self):
        P = gen_random_mtensor(3, 5, 0.1, 2)
        x = solve_fullm(P.A, P.b, SolverConfig(method="fullm", tol=1e-14)).solution
        r = residual(P.A, P.b, build_preconditioner(P.A, "pf"), x)
        assert np.linalg.norm(r) <= 1e-12 * np.linalg.norm(P.b)

    def test_identity_pj(self, rng):
        x = rng.uniform(0.1, 2, 4)
        b = rng.uniform(0.1, 2, 4)
        r = residual(identity_tensor(3, 4), b, build_preconditioner(identity_tensor(3, 4), "pj"), x)
        assert_allclose(r, b - x**2, rtol=1e-14)

    def test_pf_matches_lu(self):
        P = gen_random_mtensor(3, 3, 0.1, 5)
        x = np.array([0.3, 0.7, 1.1])
        want = lu_solve(majorization_matrix(P.A), P.b - apply_xm1(P.A, x))
        assert_allclose(residual(P.A, P.b, build_preconditioner(P.A, "pf"), x), want, rtol=1e-12)


class TestSteps:
    def test_tr_at_solution_is_still(self):
        P = identity_problem(3, [4.0, 9.0])
        pc = build_preconditioner(P.A, "pf")
        st = TaarState.start(P.A, P.b, pc, np.array([2.0, 3.0]))
        before = st.xm1.copy()
        tr_step(P.A, P.b, pc, st)
        assert_array_equal(st.xm1, before)
        assert "degenerate_direction" in st.flags

    def test_tr_identity_solves_in_one(self):
        P = identity_problem(3, [4.0, 9.0])
        rep = taar_solve(P.A, P.b, SolverConfig(method="tr"))
        assert rep.converged and rep.iterations == 1
        assert_allclose(rep.solution, [2.0, 3.0], rtol=1e-14)

    def test_state_keeps_root_relation(self):
        P = gen_random_mtensor(4, 5, 0.1, 0)
        pc = build_preconditioner(P.A, "pf")
        st = TaarState.start(P.A, P.b, pc, np.full(5, 0.1))
        for _ in range(5):
            tr_step(P.A, P.b, pc, st)
            st.evaluate(P.A, P.b, pc)
            assert_allclose(st.x, elementwise_pow(st.xm1, 1.0 / 3.0), rtol=1e-15)

    def test_tar_exact_fit(self):
        P = gen_random_mtensor(3, 4, 0.1, 1)
        pc = build_preconditioner(P.A, "pf")
        st = TaarState.start(P.A, P.b, pc, np.full(4, 0.1), q=3)
        dx = np.array([0.01, -0.02, 0.03, 0.0])
        st.window.record(2, dx, st.r.copy())
        before = st.xm1.copy()
        tar_step(P.A, P.b, pc, st)
        # Gamma = 1, so r - R Gamma = 0 and the update is exactly -X Gamma
        assert_allclose(st.xm1, before - dx, rtol=1e-12, atol=1e-15)

    def test_tar_with_zero_gamma_is_tr(self):
        P = gen_random_mtensor(3, 4, 0.1, 1)
        pc = build_preconditioner(P.A, "pf")
        a = TaarState.start(P.A, P.b, pc, np.full(4, 0.1), q=2)
        c = TaarState.start(P.A, P.b, pc, np.full(4, 0.1), q=2)
        # a residual difference orthogonal to r gives Gamma = 0
        v = np.linalg.svd(a.r[None, :])[2][-1]
        a.window.record(2, np.ones(4), v)
        tar_step(P.A, P.b, pc, a)
        tr_step(P.A, P.b, pc, c)
        assert_allclose(a.xm1, c.xm1, rtol=1e-10)

    def test_empty_window_falls_back(self):
        P = gen_random_mtensor(3, 4, 0.1, 1)
        pc = build_preconditioner(P.A, "pf")
        st = TaarState.start(P.A, P.b, pc, np.full(4, 0.1))
        tar_step(P.A, P.b, pc, st)
        assert "empty_history" in st.flags


class TestHistoryWindow:
    def test_ring_buffer(self):
        w = HistoryWindow(2, 3)
        for k in range(2, 8):
            w.record(k, np.full(2, k), np.full(2, -k))
            assert w.filled == min(3, k - 1)
        X, R = w.columns()
        assert_array_equal(X[0], [5.0, 6.0, 7.0])
        assert_array_equal(R[0], [-5.0, -6.0, -7.0])

    def test_partial(self):
        w = HistoryWindow(3, 6)
        w.record(2, np.ones(3), np.ones(3))
        X, _ = w.columns()
        assert X.shape == (3, 1)


class TestTaarSolve:
    @pytest.mark.parametrize("kind", ["pj", "pgs", "pf"])
    def test_order4_dim50(self, kind):
        P = gen_random_mtensor(4, 50, 0.01, 0)
        rep = taar_solve(P.A, P.b, SolverConfig(precond=kind))
        assert rep.converged and rep.iterations <= 30

    def test_sine50(self):
        P = gen_sine_symmetric(50)
        rep = taar_solve(P.A, P.b)
        assert rep.converged and rep.iterations <= 12

    def test_preconditioners_agree(self):
        P = gen_random_mtensor(3, 30, 0.01, 4)
        sols = [taar_solve(P.A, P.b, SolverConfig(precond=k)).solution for k in ("pj", "pgs", "pf")]
        for s in sols[1:]:
            assert np.max(np.abs(s - sols[0])) / np.max(np.abs(sols[0])) <= 1e-6

    def test_agrees_with_fullm(self):
        for seed in range(5):
            P = gen_random_mtensor(3, 8 + seed, 0.2, seed)
            t = taar_solve(P.A, P.b, SolverConfig(tol=1e-12))
            f = solve_fullm(P.A, P.b, SolverConfig(method="fullm", tol=1e-12))
            assert t.converged
            assert np.max(np.abs(t.solution - f.solution)) / np.max(np.abs(f.solution)) <= 1e-6
            r0 = np.linalg.norm(P.b - apply_xm1(P.A, np.full(P.n, 0.1)))
            assert np.linalg.norm(P.b - apply_xm1(P.A, t.solution)) / r0 <= 1e-12 * (1 + 1e-9)

    def test_large_p_is_pure_tr(self):
        P = gen_random_mtensor(3, 10, 0.1, 0)
        a = taar_solve(P.A, P.b, SolverConfig(method="taar", p=10**6, max_iter=40))
        c = taar_solve(P.A, P.b, SolverConfig(method="tr", max_iter=40))
        assert_array_equal(a.solution, c.solution)
        assert a.residual_history == c.residual_history

    def test_flops_are_linear_in_iterations(self):
        from mtaar.flops import flops_per_iteration

        P = gen_random_mtensor(3, 10, 0.1, 0)
        rep = taar_solve(P.A, P.b, SolverConfig(precond="pgs"))
        per = flops_per_iteration("taar", 3, 10, "pgs")
        assert rep.cumulative_flops == [k * per for k in range(rep.iterations + 1)]

    def test_tr_residual_decreases_early(self):
        P = gen_random_mtensor(3, 200, 0.01, 0)
        h = taar_solve(P.A, P.b, SolverConfig(method="tr", max_iter=9)).residual_history
        assert len(h) == 10
        assert np.all(np.diff(h) <= 0)

    def test_acceleration_at_200(self):
        from mtaar.splitting import solve_j1

        P = gen_random_mtensor(3, 200, 0.01, 0)
        t = taar_solve(P.A, P.b)
        j = solve_j1(P.A, P.b)
        assert t.converged and j.converged
        assert 10 * t.iterations <= j.iterations


class TestOrderTwo:
    def test_reduces_to_matrix_scheme(self):
        P = gen_random_mtensor(2, 15, 0.2, 9)
        for k in (1, 3, 9, 10, 11, 25):
            cfg = SolverConfig(method="taar", precond="pj", max_iter=k, tol=1e-300)
            t = taar_solve(P.A, P.b, cfg)
            a = aar_linear_solve(np.asarray(P.A.array), P.b, cfg.with_(method="aar-linear"))
            assert np.max(np.abs(t.solution - a.solution)) <= 1e-10

    def test_identity_one_step(self, rng):
        b = rng.uniform(0.5, 2, 6)
        rep = aar_linear_solve(np.eye(6), b)
        assert rep.converged and rep.iterations == 1
        assert_allclose(rep.solution, b, rtol=1e-14)

    def test_diagonal_one_step(self):
        A = np.diag(np.arange(1.0, 11.0))
        rep = aar_linear_solve(A, np.ones(10))
        assert rep.converged and rep.iterations == 1
        assert_allclose(A @ rep.solution, np.ones(10), rtol=1e-14)

    def test_beats_plain_richardson(self):
        rng = np.random.default_rng(50)
        A = -rng.uniform(0, 1, (50, 50))
        np.fill_diagonal(A, 0.0)
        A[np.diag_indices(50)] = 1.05 * np.abs(A).sum(axis=1)
        b = rng.uniform(0.5, 1.5, 50)
        aar = aar_linear_solve(A, b, SolverConfig(method="aar-linear", max_iter=200))
        plain = aar_linear_solve(A, b, SolverConfig(method="aar-linear", max_iter=5000, p=10**6))
        assert aar.converged and aar.iterations <= 200
        assert plain.converged and plain.iterations > aar.iterations

    def test_rejects_other_preconditioners(self):
        with pytest.raises(ValueError):
            aar_linear_solve(np.eye(2), np.ones(2), precond="ilu0")

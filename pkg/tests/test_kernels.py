"""The numba kernels and the pure-numpy fallback must agree."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from mtaar import _kernels

pytestmark = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def backends():
    return _kernels.numpy_kernels(), _kernels.numba_kernels()


def test_backend_name():
    assert _kernels.BACKEND in ("numba", "numpy")


@pytest.mark.parametrize("m,n", [(2, 5), (3, 4), (4, 3), (5, 2)])
def test_contract(backends, m, n):
    np_k, nb_k = backends
    rng = np.random.default_rng(m * 10 + n)
    flat = rng.standard_normal(n**m)
    x = rng.standard_normal(n)
    for times in range(m):
        assert_allclose(nb_k["contract"](flat, n, x, times), np_k["contract"](flat, n, x, times), rtol=1e-13, atol=1e-13)


def test_contract_read_only_input(backends):
    flat = np.arange(27.0)
    flat.setflags(write=False)
    np_k, nb_k = backends
    x = np.ones(3)
    assert_allclose(nb_k["contract"](flat, 3, x, 2), np_k["contract"](flat, 3, x, 2))


def test_positive_root(backends):
    np_k, nb_k = backends
    rng = np.random.default_rng(7)
    for _ in range(200):
        deg = int(rng.integers(1, 5))
        c = np.concatenate([-rng.uniform(0, 1, deg), [rng.uniform(0.5, 3)]])
        target = rng.uniform(0.1, 5)
        t1, s1 = np_k["positive_root"](c, target, 1.0)
        t2, s2 = nb_k["positive_root"](c, target, 1.0)
        assert s1 == s2 == _kernels.ROOT_OK
        assert_allclose(t1, t2, rtol=1e-13)


def test_positive_root_no_bracket(backends):
    for k in backends:
        _, status = k["positive_root"](np.array([0.0, 0.0, 1.0]), -1.0, 1.0)
        assert status == _kernels.ROOT_NO_BRACKET


@pytest.mark.parametrize("m,n", [(3, 5), (4, 4)])
def test_triangular_sweep(backends, m, n):
    from mtaar.problems import gen_random_mtensor

    P = gen_random_mtensor(m, n, 0.1, 3)
    rhs = np.random.default_rng(1).uniform(0.5, 1.5, n)
    outs = []
    for k in backends:
        out = np.zeros(n)
        assert k["triangular_sweep"](P.A.data, n, m, rhs, np.full(n, 0.1), 0.0, out) == -1
        outs.append(out)
    assert_allclose(outs[0], outs[1], rtol=1e-13)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lfasym.multidim import (
    EigenDecomp,
    HessianModel,
    NotPositiveDefiniteError,
    asym_J_nd,
    asym_P_nd,
    check_positive_definite,
    cn_large_k,
    cn_multi_index_sum,
    hessian_fd,
    jacobi_eigen,
    multi_indices,
    quad_form_inv,
    rotation_matrix,
)

from conftest import rel_err


def random_spd(rng, d, cond=50.0):
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    mu = np.exp(rng.uniform(0, math.log(cond), d))
    return Q @ np.diag(mu) @ Q.T


# --- Jacobi -------------------------------------------------------------------

def test_jacobi_identity():
    dec = jacobi_eigen(np.eye(3))
    np.testing.assert_array_equal(dec.mu, np.ones(3))
    np.testing.assert_array_equal(dec.H0, np.eye(3))


@pytest.mark.parametrize("A, mu", [
    ([[2.0, 0.0], [0.0, 3.0]], [2.0, 3.0]),
    ([[2.0, 1.0], [1.0, 2.0]], [1.0, 3.0]),
])
def test_jacobi_examples(A, mu):
    np.testing.assert_allclose(jacobi_eigen(A).mu, mu, rtol=1e-14)


@pytest.mark.parametrize("d", range(1, 7))
def test_jacobi_reconstruction(rng, d):
    for _ in range(10):
        A = random_spd(rng, d)
        dec = jacobi_eigen(A)
        scale = np.linalg.norm(A)
        assert np.max(np.abs(dec.H0 @ np.diag(dec.mu) @ dec.H0.T - A)) <= 1e-10 * scale
        assert np.max(np.abs(dec.H0.T @ A @ dec.H0 - np.diag(dec.mu))) <= 1e-10 * scale
        assert abs(np.linalg.det(dec.H0) - 1.0) <= 1e-10
        np.testing.assert_allclose(dec.mu, np.linalg.eigvalsh(A), rtol=1e-11)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(ValueError):
        jacobi_eigen([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        jacobi_eigen(np.ones((2, 3)))


def test_jacobi_sweep_limit():
    A = np.array([[1.0, 0.4, 0.2], [0.4, 2.0, 0.3], [0.2, 0.3, 3.0]])
    with pytest.raises(ArithmeticError):
        jacobi_eigen(A, max_sweeps=1, tol=1e-300)


# --- definiteness and quadratic forms --------------------------------------

@pytest.mark.parametrize("A, expected", [
    (np.eye(2), True),
    (np.diag([1.0, -1.0]), False),
    (np.diag([1.0, 1e-15]), False),
])
def test_positive_definite_examples(A, expected):
    assert check_positive_definite(jacobi_eigen(A)) is expected


def test_quad_form_examples():
    assert quad_form_inv(jacobi_eigen(np.eye(3)), [1.0, 2.0, 2.0]) == pytest.approx(9.0)
    assert quad_form_inv(jacobi_eigen(np.diag([2.0, 8.0])), [2.0, 4.0]) == pytest.approx(4.0)


def test_quad_form_vs_linear_solve(rng):
    for d in (2, 3, 5):
        for _ in range(10):
            A = random_spd(rng, d)
            k = rng.normal(size=d) * 5
            ref = float(k @ np.linalg.solve(A, k))
            assert rel_err(quad_form_inv(jacobi_eigen(A), k), ref) < 1e-10


def test_quad_form_degenerate():
    with pytest.raises(NotPositiveDefiniteError):
        quad_form_inv(jacobi_eigen(np.diag([1.0, 0.0])), [1.0, 1.0])


# --- c_n coefficients -------------------------------------------------------

def test_cn_examples():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    dec = jacobi_eigen(A)
    assert cn_large_k(dec, [1.0, 1.0], 0) == pytest.approx(
        math.sqrt((2 * math.pi) ** 2 / np.linalg.det(A)), rel=1e-14)
    dec1 = jacobi_eigen([[1.0]])
    for n in range(6):
        k = 1.7
        expected = math.sqrt(2 * math.pi) * (-k * k / 2) ** n / math.factorial(n)
        assert cn_large_k(dec1, [k], n) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(ValueError):
        cn_large_k(dec1, [1.0], -1)


def test_cn_series_resums_to_gaussian(rng):
    A = random_spd(rng, 3)
    dec = jacobi_eigen(A)
    k = rng.normal(size=3)
    lam = 20.0
    target = math.sqrt((2 * math.pi) ** 3 / np.linalg.det(A)) * math.exp(
        -quad_form_inv(dec, k) / (2 * lam))
    partial = [math.fsum(cn_large_k(dec, k, n) / lam ** n for n in range(N + 1))
               for N in (0, 1, 2, 3, 4, 30)]
    errs = [abs(p - target) for p in partial]
    assert all(b < a for a, b in zip(errs[:5], errs[1:5]))
    assert errs[-1] < 1e-14 * target


@pytest.mark.parametrize("d, n", [(1, 3), (2, 4), (3, 3), (4, 2)])
def test_multi_indices_count(d, n):
    idx = list(multi_indices(d, n))
    assert len(idx) == math.comb(n + d - 1, d - 1)
    assert len(set(idx)) == len(idx)
    assert all(sum(t) == n and min(t) >= 0 for t in idx)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_multi_index_identity(rng, d):
    for _ in range(5):
        dec = jacobi_eigen(random_spd(rng, d))
        k = rng.normal(size=d) * 3
        for n in range(7):
            val, terms = cn_multi_index_sum(dec, k, n)
            assert all(t.order == n for t in terms)
            assert rel_err(val, cn_large_k(dec, k, n)) < 1e-10


# --- leading-order formulas -------------------------------------------------

def gaussian_transform(A, lam, k, f0=0.0):
    d = len(k)
    return (math.exp(-lam * f0) * math.sqrt((2 * math.pi) ** d / (lam ** d * np.linalg.det(A)))
            * math.exp(-float(k @ np.linalg.solve(A, k)) / (2 * lam)))


@pytest.mark.parametrize("lam", [0.01, 1.0, 37.0, 1e5])
def test_gaussian_exactness_all_lambda(rng, lam):
    for d in (1, 2, 3):
        A = random_spd(rng, d)
        k = rng.normal(size=d) * 4
        val = asym_J_nd(HessianModel(d, 1e-3, A), lam, k)
        assert val.imag == 0
        assert rel_err(val.real, gaussian_transform(A, lam, k, 1e-3)) < 1e-12


def test_asym_J_large_lambda_limit():
    model = HessianModel(2, 0.0, np.array([[2.0, 1.0], [1.0, 3.0]]))
    lam = 1e12
    limit = math.sqrt((2 * math.pi) ** 2 / (lam ** 2 * 5.0))
    assert rel_err(asym_J_nd(model, lam, [1.0, -2.0]).real, limit) < 1e-11


def test_asym_J_reduces_to_1d_leading_symbol():
    from lfasym.series1d import Domain, ExpansionSpec1D, leading_symbol_closed_form
    a0 = 1.3
    spec = ExpansionSpec1D(2, 1, (a0,), 0.0, Domain.two_sided(2, 2))
    model = HessianModel(1, 0.0, [[2 * a0]])
    for lam, k in [(50.0, 3.0), (1e3, 20.0)]:
        assert rel_err(asym_J_nd(model, lam, [k]), leading_symbol_closed_form(spec, lam, k) / 2) < 1e-13


@pytest.mark.parametrize("d", [1, 2, 3])
def test_asym_P_unit_hessian(d):
    model = HessianModel(d, 0.0, np.eye(d))
    for kmag in (2.0, 9.0):
        k = np.full(d, kmag / math.sqrt(d))
        expected = (2 * math.pi) ** (d / 2) * kmag ** (-d) * math.exp(-0.5)
        assert rel_err(asym_P_nd(model, 2, k), expected) < 1e-13


def test_asym_P_preconditions():
    model = HessianModel(2, 0.0, np.eye(2))
    with pytest.raises(ValueError):
        asym_P_nd(model, 1.5, [1.0, 1.0])
    with pytest.raises(ValueError):
        asym_P_nd(model, 2.0, [0.0, 0.0])
    with pytest.raises(ValueError):
        asym_J_nd(model, -1.0, [1.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(angles=st.lists(st.floats(-math.pi, math.pi), min_size=3, max_size=3),
       seed=st.integers(0, 2 ** 32 - 1),
       s=st.floats(2.0, 4.0))
def test_rotation_invariance(angles, seed, s):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, 3, cond=10.0)
    k = rng.normal(size=3) * 2
    R = rotation_matrix(angles, 3)
    base = asym_P_nd(HessianModel(3, -0.2, A), s, k)
    rotated = asym_P_nd(HessianModel(3, -0.2, 0.5 * (R.T @ A @ R + (R.T @ A @ R).T)), s, R.T @ k)
    assert rel_err(rotated, base) < 1e-12


# --- finite-difference Hessian ----------------------------------------------

def test_hessian_fd_examples():
    m = hessian_fd(lambda X: 0.5 * np.sum(X ** 2, axis=1), 3)
    np.testing.assert_allclose(m.A, np.eye(3), atol=1e-8)
    m = hessian_fd(lambda X: -np.exp(-np.sum(X ** 2, axis=1)), 2)
    np.testing.assert_allclose(m.A, 2 * np.eye(2), atol=1e-6)
    assert m.f0 == -1.0
    m = hessian_fd(lambda X: X[:, 0] ** 2 + X[:, 0] * X[:, 1] + X[:, 1] ** 2, 2)
    np.testing.assert_allclose(m.A, [[2.0, 1.0], [1.0, 2.0]], atol=1e-8)


def test_hessian_fd_non_critical():
    with pytest.raises(ValueError):
        hessian_fd(lambda X: np.sum(X ** 2, axis=1) + 0.1 * X[:, 0], 2)


# --- model validation and serialisation ------------------------------------

def test_hessian_model_rejects_asymmetric():
    with pytest.raises(ValueError):
        HessianModel(2, 0.0, [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        HessianModel.from_dict({"d": 2, "f0": 0.0, "A": [1.0, 0.0, 0.0]})


def test_hessian_model_is_read_only():
    m = HessianModel(2, 0.0, np.eye(2))
    with pytest.raises(ValueError):
        m.A[0, 0] = 5.0


@settings(max_examples=40)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 5), f0=st.floats(-10, 10))
def test_hessian_model_json_round_trip(seed, d, f0):
    A = random_spd(np.random.default_rng(seed), d)
    A = 0.5 * (A + A.T)
    m = HessianModel(d, f0, A)
    back = HessianModel.from_json(m.to_json())
    assert back.d == d and back.f0 == f0
    np.testing.assert_array_equal(back.A, m.A)


def test_eigen_decomp_properties():
    dec = EigenDecomp(np.array([2.0, 3.0]), np.eye(2))
    assert dec.det == 6.0 and dec.d == 2

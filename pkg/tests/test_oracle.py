import math

import mpmath
import numpy as np
import pytest

from lfasym.multidim import HessianModel, asym_J_nd
from lfasym.oracle import (
    GAUSS_W,
    KRONROD_W,
    NODES,
    DomainBox,
    UnsupportedDimensionError,
    exterior_tail_bound,
    exterior_tail_bound_asymptotic,
    inf_rho,
    inf_sigma,
    integrate_1d,
    integrate_nd,
    integrate_pbar,
)
from lfasym.presets import get_preset

from conftest import rel_err

A2 = np.array([[2.0, 1.0], [1.0, 3.0]])


def sq(x):
    return x * x


def quad_form(X):
    return 0.5 * np.einsum("ni,ij,nj->n", X, A2, X)


# --- rule constants -----------------------------------------------------------

def test_gauss_nodes_match_legendre():
    x, w = np.polynomial.legendre.leggauss(7)
    mask = GAUSS_W != 0
    np.testing.assert_allclose(NODES[mask], x, atol=1e-15)
    np.testing.assert_allclose(GAUSS_W[mask], w, atol=1e-15)


@pytest.mark.parametrize("deg", range(0, 24))
def test_rule_polynomial_exactness(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    if deg <= 22:
        assert KRONROD_W @ NODES ** deg == pytest.approx(exact, abs=1e-14)
    if deg <= 13:
        assert GAUSS_W @ NODES ** deg == pytest.approx(exact, abs=1e-14)


# --- Gaussian closed forms ----------------------------------------------------

@pytest.mark.parametrize("lam", [1.0, 10.0, 1e2, 1e4])
@pytest.mark.parametrize("k", [0.0, 1.0, 5.0, 20.0])
def test_gaussian_1d(lam, k):
    tol = 1e-10
    res = integrate_1d(sq, 1.0, k, lam, (-8.0, 8.0), tol, budget=2_000_000)
    l1 = math.sqrt(math.pi / lam)
    exact = l1 * math.exp(-k * k / (4 * lam))
    assert abs(res.value - exact) <= tol * l1
    if exact > 1e-6 * l1:
        assert res.converged
        assert abs(res.value - exact) <= tol * exact


@pytest.mark.parametrize("lam", [1.0, 10.0, 1e2, 1e4])
@pytest.mark.parametrize("k", [0.0, 1.0, 5.0, 20.0])
def test_gaussian_2d(lam, k):
    tol = 1e-8
    kv = np.array([k, k]) / math.sqrt(2)
    box = DomainBox.cube(min(8.0, 12.0 / math.sqrt(lam)), 2)
    res = integrate_nd(quad_form, kv, lam, box, tol, budget=2_000_000)
    l1 = 2 * math.pi / (lam * math.sqrt(np.linalg.det(A2)))
    exact = l1 * math.exp(-float(kv @ np.linalg.solve(A2, kv)) / (2 * lam))
    assert abs(res.value - exact) <= tol * l1
    if exact > 1e-6 * l1:
        assert res.converged
        assert abs(res.value - exact) <= tol * exact


def test_unit_quadratic_2d_total_mass():
    res = integrate_nd(lambda X: 0.5 * np.sum(X * X, axis=1), [0.0, 0.0], 1.0,
                       DomainBox.cube(9.0, 2), 1e-10)
    assert rel_err(res.value, 2 * math.pi) < 1e-10


def test_unit_quadratic_3d():
    lam = 4.0
    k = np.array([1.0, -2.0, 0.5])
    res = integrate_nd(lambda X: 0.5 * np.sum(X * X, axis=1), k, lam,
                       DomainBox.cube(5.0, 3), 1e-7)
    exact = (2 * math.pi / lam) ** 1.5 * math.exp(-float(k @ k) / (2 * lam))
    assert res.converged
    assert rel_err(res.value, exact) < 1e-7


def test_asymptotic_consistency_growing_lambda():
    def f(X):
        return 1.0 - np.exp(-np.sum(X * X, axis=1))

    model = HessianModel(2, 0.0, 2 * np.eye(2))
    k = np.array([1.0, 0.5])
    errs = []
    for lam in (10.0, 100.0, 1000.0):
        res = integrate_nd(f, k, lam, DomainBox.cube(1.5, 2), 1e-9)
        errs.append(abs(res.value / asym_J_nd(model, lam, k) - 1))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 2e-3


# --- endpoint singularity -----------------------------------------------------

@pytest.mark.parametrize("beta", [0.25, 0.5, 0.8])
def test_beta_below_one_substitution(beta):
    lam, k = 3.0, 4.0
    res = integrate_1d(sq, beta, k, lam, (0.0, 5.0), 1e-11)
    mpmath.mp.dps = 30
    # reference in t = x^beta, where the integrand is smooth
    ref = mpmath.quad(lambda t: mpmath.exp(-lam * t ** (2 / beta) + 1j * k * t ** (1 / beta)) / beta,
                      [0, 0.5, 0.8, 1, 5 ** beta])
    assert res.converged
    assert rel_err(res.value, complex(ref)) < 1e-10


def test_non_integer_beta_needs_positive_box():
    with pytest.raises(ValueError):
        integrate_1d(sq, 0.5, 1.0, 1.0, (-1.0, 1.0))
    with pytest.raises(ValueError):
        integrate_1d(sq, 0.0, 1.0, 1.0, (0.0, 1.0))


# --- invariants -----------------------------------------------------------------

@pytest.mark.parametrize("k", [3.0, 6.0, 11.0])
def test_conjugate_symmetry_two_sided(k):
    p = get_preset("cubic-perturbed")
    lam = k ** 3
    tol = 1e-11
    plus = integrate_1d(p.f1d, 1.0, k, lam, (-3.0, 3.0), tol)
    minus = integrate_1d(p.f1d, 1.0, -k, lam, (-3.0, 3.0), tol)
    assert abs(minus.value - plus.value.conjugate()) <= tol * abs(plus.value)


def test_conjugate_symmetry_whole_line():
    p = get_preset("negative-gaussian")
    tol = 1e-10
    plus = integrate_pbar(p.evaluator, p.fourier_transform, [5.0], 2.0, p.box, tol)
    minus = integrate_pbar(p.evaluator, p.fourier_transform, [-5.0], 2.0, p.box, tol)
    assert abs(minus.p - plus.p.conjugate()) <= tol * abs(plus.p)


@pytest.mark.parametrize("k, lam", [(2.0, 4.0), (10.0, 100.0), (30.0, 400.0)])
def test_panel_doubling(k, lam):
    p = get_preset("cubic-perturbed")
    tol = 1e-10
    base = integrate_1d(p.f1d, 1.0, k, lam, (-3.0, 3.0), tol)
    dense = integrate_1d(p.f1d, 1.0, k, lam, (-3.0, 3.0), tol, panel_density=2.0)
    assert base.converged and dense.converged
    assert abs(base.value - dense.value) < 2 * tol * abs(base.value)


def test_deterministic():
    p = get_preset("cubic-perturbed")
    a = integrate_1d(p.f1d, 1.0, 7.0, 300.0, (-3.0, 3.0), 1e-12)
    b = integrate_1d(p.f1d, 1.0, 7.0, 300.0, (-3.0, 3.0), 1e-12)
    assert a == b


def test_budget_exhaustion_flags_result():
    res = integrate_1d(sq, 1.0, 40.0, 1.0, (-8.0, 8.0), 1e-14, budget=1000)
    assert not res.converged
    assert res.evaluations >= 1000


def test_dimension_limit():
    box = DomainBox.cube(1.0, 4)
    with pytest.raises(UnsupportedDimensionError):
        integrate_nd(lambda X: np.sum(X * X, axis=1), np.ones(4), 1.0, box)
    with pytest.raises(UnsupportedDimensionError):
        integrate_pbar(lambda X: np.sum(X * X, axis=1), lambda k: 0.0, np.ones(4), 2.0, box)


# --- subtracted whole-space integral ---------------------------------------

def test_pbar_negative_gaussian_matches_reference():
    p = get_preset("negative-gaussian")
    k = 4.0
    res = integrate_pbar(p.evaluator, p.fourier_transform, [k], 2.0, p.box, 1e-11)
    assert res.fourier_term == pytest.approx(-k * k * math.sqrt(math.pi) * math.exp(-k * k / 4))
    mpmath.mp.dps = 40
    K = k * k
    # P(k) for k != 0 is the transform of e^{-Kf} - 1, which decays like e^{-x^2}
    ref = 2 * mpmath.quad(lambda x: mpmath.expm1(K * mpmath.exp(-x * x)) * mpmath.cos(k * x),
                          [0, 1, 2, 3, 4, 6, 8, mpmath.inf])
    assert rel_err(res.p, complex(ref)) < 1e-9


@pytest.mark.parametrize("k", [4.0, 8.0])
def test_pbar_box_stability(k):
    p = get_preset("negative-gaussian")
    tol = 1e-10
    small = integrate_pbar(p.evaluator, p.fourier_transform, [k], 2.0, p.box, tol)
    large = integrate_pbar(p.evaluator, p.fourier_transform, [k], 2.0, p.box.scaled(1.5), tol)
    assert abs(small.p - large.p) < 5 * tol * abs(large.p)


def test_pbar_zero_field():
    res = integrate_pbar(lambda X: np.zeros(len(X)), lambda k: 0.0, [3.0], 2.0,
                         DomainBox.cube(2.0, 1))
    assert res.pbar.value == 0 and res.p == 0


def test_pbar_preconditions():
    box = DomainBox.cube(2.0, 1)
    with pytest.raises(ValueError):
        integrate_pbar(lambda X: X[:, 0], None, [1.0], 2.0, box)
    with pytest.raises(ValueError):
        integrate_pbar(lambda X: X[:, 0], lambda k: 0.0, [0.0], 2.0, box)


# --- infima -------------------------------------------------------------------------

def neg_gauss(X):
    return -np.exp(-np.sum(np.asarray(X) ** 2, axis=1))


@pytest.mark.parametrize("f, eps, expected", [
    (lambda X: X[:, 0] ** 2, 0.5, 0.25),
    (lambda X: X[:, 0] ** 4, 1.0, 1.0),
    (neg_gauss, 1.0, 1 - math.exp(-1)),
])
def test_inf_rho_examples(f, eps, expected):
    assert inf_rho(f, eps, DomainBox.cube(4.0, 1)) == pytest.approx(expected, rel=1e-12)


def test_inf_rho_2d():
    assert inf_rho(neg_gauss, 1.0, DomainBox.cube(4.0, 2)) == pytest.approx(1 - math.exp(-1),
                                                                             rel=1e-12)


def test_inf_rho_violation_is_reported(caplog):
    rho = inf_rho(lambda X: np.cos(3 * X[:, 0]), 0.5, DomainBox.cube(4.0, 1))
    assert rho <= 0
    assert "violated" in caplog.text


@pytest.mark.parametrize("d", [1, 2])
def test_inf_sigma_negative_gaussian(d):
    sigma = inf_sigma(neg_gauss, 1.0, DomainBox.cube(6.0, d),
                      envelope=lambda r: math.exp(-r * r))
    assert sigma == pytest.approx(1 - math.exp(-1), rel=1e-12)


def test_inf_sigma_requires_negative_minimum():
    with pytest.raises(ValueError):
        inf_sigma(lambda X: X[:, 0] ** 2, 1.0, DomainBox.cube(2.0, 1))


def test_inf_sigma_small_eps():
    box = DomainBox.cube(4.0, 1)
    vals = [inf_sigma(neg_gauss, eps, box) for eps in (0.5, 0.1, 0.01)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] < 2e-4


# --- tail bound --------------------------------------------------------------------

def test_tail_bound_vanishes_at_zero():
    assert exterior_tail_bound(1.0, -1.0, 0.5, 0.0, 2.0) == 0.0


def test_tail_bound_errors():
    with pytest.raises(ValueError):
        exterior_tail_bound(-1.0, -1.0, 0.5, 1.0, 2.0)
    with pytest.raises(ValueError):
        exterior_tail_bound(1.0, -1.0, 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        exterior_tail_bound_asymptotic(1.0, -0.5, 0.7, 1.0, 2.0)


def test_tail_bound_growth_and_suppression():
    C, f0, sigma, s = (math.pi / 2) ** 0.5, -1.0, 1 - math.exp(-1), 2.0
    for k in (8.0, 12.0):
        bound = exterior_tail_bound(C, f0, sigma, k, s)
        asym = exterior_tail_bound_asymptotic(C, f0, sigma, k, s)
        assert rel_err(bound, asym) < 1e-3
        log_ratio = math.log(bound) - (-k ** s * f0)
        assert log_ratio == pytest.approx(
            exterior_tail_bound_asymptotic(C, f0, sigma, k, s, log_value=True) + k ** s * f0,
            rel=1e-3)
        assert log_ratio < -sigma * k ** s + 5

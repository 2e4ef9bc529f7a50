"""d-dimensional Laplace-Fourier asymptotics around a non-degenerate minimum.

Only the Hessian at the critical point enters at leading order: with
``A = H0 diag(mu) H0^T`` the coefficients of the Laplace series in the
large-|k| limit resum to a Gaussian in ``k^T A^{-1} k / (2 lambda)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "HessianModel",
    "EigenDecomp",
    "MultiIndexTerm",
    "NotPositiveDefiniteError",
    "jacobi_eigen",
    "check_positive_definite",
    "quad_form_inv",
    "cn_large_k",
    "cn_multi_index_sum",
    "multi_indices",
    "asym_J_nd",
    "asym_P_nd",
    "hessian_fd",
]

PD_THRESHOLD = 1e-12
MAX_DIM = 16


class NotPositiveDefiniteError(ValueError):
    pass


def _as_vector(k, d: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(k, dtype=float))
    if v.shape != (d,):
        raise ValueError(f"k must have {d} components, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class HessianModel:
    d: int
    f0: float
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float).reshape(self.d, self.d)
        if not 1 <= self.d <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {self.d}")
        norm = np.linalg.norm(A)
        if np.max(np.abs(A - A.T)) > 1e-12 * max(norm, 1e-300):
            raise ValueError("Hessian is not symmetric")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    def to_dict(self) -> dict:
        return {"d": self.d, "f0": self.f0, "A": [float(v) for v in self.A.ravel()]}

    @classmethod
    def from_dict(cls, data: dict) -> "HessianModel":
        d = int(data["d"])
        A = np.asarray(data["A"], dtype=float)
        if A.size != d * d:
            raise ValueError(f"A must hold {d * d} entries, got {A.size}")
        return cls(d, float(data["f0"]), A.reshape(d, d))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "HessianModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class EigenDecomp:
    mu: np.ndarray
    H0: np.ndarray

    @property
    def det(self) -> float:
        return float(np.prod(self.mu))

    @property
    def d(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class MultiIndexTerm:
    n_vec: tuple[int, ...]
    weight: float

    @property
    def order(self) -> int:
        return sum(self.n_vec)


def jacobi_eigen(A, *, max_sweeps: int = 100, tol: float = 1e-13) -> EigenDecomp:
    """Cyclic Jacobi rotations for a real symmetric matrix.

    Returns eigenvalues in ascending order and an orthogonal ``H0`` with
    ``H0^T A H0 = diag(mu)`` and ``det H0 = +1``.
    """
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise ValueError("jacobi_eigen needs a symmetric matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    target = tol * scale

    def off_norm(m):
        return float(np.linalg.norm(m - np.diag(np.diag(m))))

    for _ in range(max_sweeps):
        if off_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    else:
        if off_norm(a) > target:
            raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    mu = np.diag(a).copy()
    order = np.argsort(mu, kind="stable")
    mu = mu[order]
    v = v[:, order]
    if np.linalg.det(v) < 0:
        v[:, 0] = -v[:, 0]
    return EigenDecomp(mu, v)


def check_positive_definite(dec: EigenDecomp) -> bool:
    mu = np.asarray(dec.mu)
    top = float(np.max(mu))
    return bool(top > 0 and np.min(mu) > PD_THRESHOLD * top)


def _require_pd(dec: EigenDecomp):
    if not check_positive_definite(dec):
        raise NotPositiveDefiniteError(f"Hessian is not positive definite (mu = {dec.mu})")


def quad_form_inv(dec: EigenDecomp, k) -> float:
    """``k^T A^{-1} k`` in the eigenbasis: ``sum_j (H0^T k)_j^2 / mu_j``."""
    _require_pd(dec)
    kk = dec.H0.T @ _as_vector(k, dec.d)
    return float(np.sum(kk * kk / dec.mu))


def cn_large_k(dec: EigenDecomp, k, n: int) -> float:
    """Large-|k| coefficient ``c_n(k) = sqrt((2pi)^d/det A) (-1/2)^n (k^T A^{-1} k)^n / n!``."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    q = quad_form_inv(dec, k)
    return (math.sqrt((2 * math.pi) ** dec.d / dec.det)
            * (-0.5) ** n * q ** n / math.factorial(n))


def multi_indices(d: int, n: int) -> Iterator[tuple[int, ...]]:
    """All ``(n_1, ..., n_d)`` of non-negative integers summing to ``n``."""
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in multi_indices(d - 1, n - first):
            yield (first,) + rest


def cn_multi_index_sum(dec: EigenDecomp, k, n: int) -> tuple[float, list[MultiIndexTerm]]:
    """``c_n(k)`` by explicit enumeration over even multi-indices.

    Each term is ``prod_j (H0^T k)_j^(2 n_j) / (n_j! mu_j^n_j)``; the returned
    value includes the common prefactor so it is directly comparable with
    :func:`cn_large_k`.
    """
    _require_pd(dec)
    kk = dec.H0.T @ _as_vector(k, dec.d)
    terms = []
    for n_vec in multi_indices(dec.d, n):
        w = 1.0
        for kj, muj, nj in zip(kk, dec.mu, n_vec):
            w *= kj ** (2 * nj) / (math.factorial(nj) * muj ** nj)
        terms.append(MultiIndexTerm(n_vec, w))
    total = math.fsum(t.weight for t in terms)
    pref = math.sqrt((2 * math.pi) ** dec.d / dec.det) * (-0.5) ** n
    return pref * total, terms


def asym_J_nd(model: HessianModel, lam: float, k, dec: EigenDecomp | None = None) -> complex:
    """Leading-order ``int e^(-lambda f(x)) e^(ik.x) dx`` for large lambda."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if dec is None:
        dec = jacobi_eigen(model.A)
    q = quad_form_inv(dec, k)
    log_val = (-lam * model.f0 + 0.5 * model.d * math.log(2 * math.pi)
               - 0.5 * model.d * math.log(lam) - 0.5 * math.log(dec.det) - q / (2 * lam))
    return complex(math.exp(log_val))


def asym_P_nd(model: HessianModel, s: float, k, dec: EigenDecomp | None = None) -> complex:
    """Leading-order ``int e^(-|k|^s f(x)) e^(ik.x) dx`` for large |k|."""
    if not s >= 2:
        raise ValueError(f"s must be >= 2, got {s}")
    kv = _as_vector(k, model.d)
    kmag = float(np.linalg.norm(kv))
    if kmag == 0:
        raise ValueError("k = 0 is outside the asymptotic regime")
    return asym_J_nd(model, kmag ** s, kv, dec)


def hessian_fd(f: Callable[[np.ndarray], np.ndarray], d: int, h: float | None = None,
               *, scale: float = 0.0, grad_tol: float | None = None) -> HessianModel:
    """Central-difference Hessian of ``f`` at the origin.

    ``f`` maps an ``(n, d)`` array of points to ``n`` values.  The origin
    must be a critical point: the difference gradient has to stay below
    ``grad_tol`` (default ``1e-6 * |A| * h``).
    """
    if h is None:
        h = 5e-4 * (1.0 + scale)
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    eye = np.eye(d)
    pts = [np.zeros(d)]
    for i in range(d):
        pts += [h * eye[i], -h * eye[i]]
    for i in range(d):
        for j in range(i + 1, d):
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                pts.append(h * (si * eye[i] + sj * eye[j]))
    vals = np.asarray(f(np.array(pts)), dtype=float)
    f0 = float(vals[0])
    plus = vals[1:2 * d + 1:2]
    minus = vals[2:2 * d + 1:2]
    grad = (plus - minus) / (2 * h)
    M = np.zeros((d, d))
    M[np.diag_indices(d)] = (plus - 2 * f0 + minus) / h ** 2
    pos = 2 * d + 1
    for i in range(d):
        for j in range(i + 1, d):
            fpp, fpm, fmp, fmm = vals[pos:pos + 4]
            M[i, j] = M[j, i] = (fpp - fpm - fmp + fmm) / (4 * h * h)
            pos += 4
    M = 0.5 * (M + M.T)
    if grad_tol is None:
        grad_tol = 1e-6 * np.linalg.norm(M) * h
    if np.linalg.norm(grad) > grad_tol:
        raise ValueError(
            f"origin is not a critical point: |grad| = {np.linalg.norm(grad):.3e}")
    return HessianModel(d, f0, M)


def rotation_matrix(angles: Sequence[float], d: int) -> np.ndarray:
    """Product of Givens rotations in successive coordinate planes."""
    R = np.eye(d)
    it = iter(angles)
    for p in range(d - 1):
        for q in range(p + 1, d):
            try:
                th = next(it)
            except StopIteration:
                return R
            G = np.eye(d)
            G[[p, q], [p, q]] = math.cos(th)
            G[p, q] = -math.sin(th)
            G[q, p] = math.sin(th)
            R = R @ G
    return R

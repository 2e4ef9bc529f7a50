"""Brute-force quadrature for Laplace-Fourier integrals.

Everything here is deliberately independent of the asymptotic machinery:
adaptive Gauss-Kronrod 7/15 panels whose initial width resolves the
oscillation ``e^{ikx}``, iterated over coordinates in d <= 3.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureResult",
    "DomainBox",
    "PbarResult",
    "UnsupportedDimensionError",
    "integrate_1d",
    "integrate_nd",
    "integrate_pbar",
    "inf_rho",
    "inf_sigma",
    "exterior_tail_bound",
    "exterior_tail_bound_asymptotic",
    "DEFAULT_BUDGET",
]

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 20_000_000

# Kronrod 15-point nodes (non-negative half) and weights; the Gauss 7-point
# rule uses every other node.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # ascending, 15 nodes
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

Integrand = Callable[[np.ndarray], np.ndarray]


_ROUNDING_FLOOR = 50 * np.finfo(float).eps


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class DomainBox:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have the same length")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError(f"box needs lo < hi componentwise, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self) -> int:
        return len(self.lo)

    @classmethod
    def cube(cls, half_width: float, d: int) -> "DomainBox":
        return cls((-half_width,) * d, (half_width,) * d)

    def scaled(self, factor: float) -> "DomainBox":
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) * factor
        return DomainBox(tuple(mid - half), tuple(mid + half))


class _Budget:
    __slots__ = ("limit", "used")

    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit


def _initial_edges(lo: float, hi: float, width: float, breakpoints=()) -> np.ndarray:
    pts = sorted({lo, hi, *(p for p in breakpoints if lo < p < hi)})
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil((b - a) / width))
        edges.extend(np.linspace(a, b, n + 1)[1:])
    return np.asarray(edges)


def _apply_rule(func: Integrand, a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(func(x.ravel())).reshape(x.shape)
    y = np.where(np.isfinite(y), y, 0.0) if np.iscomplexobj(y) else y
    kron = half * (y @ KRONROD_W)
    gauss = half * (y @ GAUSS_W)
    l1 = np.abs(half) * (np.abs(y) @ KRONROD_W)
    return kron, np.abs(kron - gauss), l1


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(np.real(z)), math.fsum(np.imag(z)))


def _adaptive(segments: Sequence[tuple[Integrand, np.ndarray]], tol: float,
              budget: _Budget, *, l1_target: bool = False,
              max_rounds: int = 200) -> QuadratureResult:
    """Bisect panels until the summed |Kronrod - Gauss| meets the target.

    The target is ``tol * |value|``, or ``tol * int|g|`` when ``l1_target``.
    Panels already at the rounding floor are not split; if only those remain
    the result is returned unconverged rather than exhausting the budget.
    Each round evaluates every new panel in one vectorised call per segment,
    and the final sum is a fixed-order ``fsum`` over panels sorted by position.
    """
    seg_ids, lefts, rights = [], [], []
    for sid, (_, edges) in enumerate(segments):
        seg_ids.append(np.full(len(edges) - 1, sid))
        lefts.append(edges[:-1])
        rights.append(edges[1:])
    seg = np.concatenate(seg_ids)
    a = np.concatenate(lefts)
    b = np.concatenate(rights)
    kron = np.zeros(len(a), dtype=complex)
    err = np.zeros(len(a))
    l1 = np.zeros(len(a))
    n_evals = 0

    def evaluate(sel_seg, sel_a, sel_b):
        nonlocal n_evals
        K = np.zeros(len(sel_a), dtype=complex)
        E = np.zeros(len(sel_a))
        L = np.zeros(len(sel_a))
        for sid, (func, _) in enumerate(segments):
            mask = sel_seg == sid
            if np.any(mask):
                K[mask], E[mask], L[mask] = _apply_rule(func, sel_a[mask], sel_b[mask])
        n_evals += 15 * len(sel_a)
        budget.used += 15 * len(sel_a)
        return K, E, L

    kron, err, l1 = evaluate(seg, a, b)
    converged = False
    for _ in range(max_rounds):
        value = _fsum_complex(kron)
        total_err = math.fsum(err)
        target = tol * (math.fsum(l1) if l1_target else abs(value))
        if total_err <= target:
            converged = True
            break
        if budget.exhausted:
            break
        width = b - a
        splittable = width > 64 * np.finfo(float).eps * np.maximum(np.abs(a), np.abs(b)) + 1e-300
        # panels whose estimate is at rounding level cannot improve by bisection
        splittable &= err > _ROUNDING_FLOOR * l1
        share = target / max(len(a), 1)
        pick = (err > share) & splittable
        if not np.any(pick):
            worst = np.argmax(np.where(splittable, err, -1.0))
            if not splittable[worst]:
                break
            pick[worst] = True
        mid = 0.5 * (a[pick] + b[pick])
        new_seg = np.concatenate([seg[pick], seg[pick]])
        new_a = np.concatenate([a[pick], mid])
        new_b = np.concatenate([mid, b[pick]])
        K, E, L = evaluate(new_seg, new_a, new_b)
        keep = ~pick
        seg = np.concatenate([seg[keep], new_seg])
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        kron = np.concatenate([kron[keep], K])
        err = np.concatenate([err[keep], E])
        l1 = np.concatenate([l1[keep], L])

    order = np.lexsort((a, seg))
    value = _fsum_complex(kron[order])
    total_err = math.fsum(err[order])
    if not converged:
        target = tol * (math.fsum(l1) if l1_target else abs(value))
        converged = total_err <= target
    return QuadratureResult(value, total_err, n_evals, converged)


def _panel_width(k: float, lam: float) -> float:
    width = math.pi / max(abs(k), 1.0)
    if lam > 1:
        width = min(width, 2.0 / math.sqrt(lam))
    return width


def _as_interval(box) -> tuple[float, float]:
    if isinstance(box, DomainBox):
        if box.d != 1:
            raise ValueError("integrate_1d needs a one-dimensional box")
        return box.lo[0], box.hi[0]
    lo, hi = box
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError(f"interval needs lo < hi, got ({lo}, {hi})")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("integration limits must be finite")
    return lo, hi


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], beta: float, k: float, lam: float,
                 box, tol: float = 1e-10, budget: int = DEFAULT_BUDGET, *,
                 panel_density: float = 1.0) -> QuadratureResult:
    """``int_box e^(-lam f(x)) x^(beta-1) e^(ikx) dx`` by adaptive Gauss-Kronrod.

    For ``beta < 1`` the box must start at 0 and the first panel is
    integrated in ``t = x^beta``, which removes the endpoint singularity.
    ``panel_density`` multiplies the number of initial panels.
    """
    if not panel_density > 0:
        raise ValueError(f"panel_density must be positive, got {panel_density}")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    lo, hi = _as_interval(box)
    integer_beta = float(beta).is_integer()
    if not integer_beta and lo < 0:
        raise ValueError("non-integer beta needs a box inside x >= 0")

    def amp(x):
        out = np.exp(-lam * np.asarray(f(x), dtype=float) + 1j * k * x)
        if beta != 1:
            out = out * np.power(x, beta - 1.0)
        return out

    width = _panel_width(k, lam) / panel_density
    segments = []
    if beta < 1 and lo == 0.0:
        c = min(width, hi)

        def substituted(t):
            x = np.power(t, 1.0 / beta)
            return np.exp(-lam * np.asarray(f(x), dtype=float) + 1j * k * x) / beta

        segments.append((substituted, np.array([0.0, c ** beta])))
        if c < hi:
            segments.append((amp, _initial_edges(c, hi, width)))
    else:
        segments.append((amp, _initial_edges(lo, hi, width, breakpoints=(0.0,))))
    return _adaptive(segments, tol, _Budget(budget))


def _integrate_field(amp: Callable[[np.ndarray], np.ndarray], k: np.ndarray,
                     lo: Sequence[float], hi: Sequence[float], lam_hint: float,
                     tol: float, budget: _Budget) -> QuadratureResult:
    """Iterated quadrature of ``amp(X) e^(ik.X)`` over a box, X of shape (n, d)."""
    d = len(lo)

    def recurse(prefix: tuple[float, ...], axis: int, inner_tol: float, l1_target: bool):
        width = _panel_width(k[axis], lam_hint)
        edges = _initial_edges(lo[axis], hi[axis], width, breakpoints=(0.0,))
        if axis == d - 1:
            fixed = np.asarray(prefix, dtype=float)
            phase0 = float(np.dot(k[:axis], fixed)) if axis else 0.0

            def g(x):
                X = np.empty((len(x), d))
                X[:, :axis] = fixed
                X[:, axis] = x
                return np.asarray(amp(X)) * np.exp(1j * (k[axis] * x + phase0))
        else:
            def g(x):
                out = np.empty(len(x), dtype=complex)
                for i, xi in enumerate(x):
                    out[i] = recurse(prefix + (float(xi),), axis + 1,
                                     0.1 * inner_tol, True).value
                return out
        return _adaptive([(g, edges)], inner_tol, budget, l1_target=l1_target)

    res = recurse((), 0, tol, False)
    return QuadratureResult(res.value, res.abs_error_estimate, budget.used,
                            res.converged and not budget.exhausted)


def integrate_nd(f: Callable[[np.ndarray], np.ndarray], k, lam: float, box: DomainBox,
                 tol: float = 1e-8, budget: int = DEFAULT_BUDGET) -> QuadratureResult:
    """``int_box e^(-lam f(x)) e^(ik.x) dx`` for d <= 3, ``f`` taking (n, d) arrays."""
    if box.d > 3:
        raise UnsupportedDimensionError(f"integrate_nd supports d <= 3, got d = {box.d}")
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    if kv.shape != (box.d,):
        raise ValueError(f"k must have {box.d} components")

    def amp(X):
        return np.exp(-lam * np.asarray(f(X), dtype=float))

    return _integrate_field(amp, kv, box.lo, box.hi, lam, tol, _Budget(budget))


@dataclass(frozen=True)
class PbarResult:
    pbar: QuadratureResult
    fourier_term: complex
    p: complex


def _subtracted_exp(u: np.ndarray) -> np.ndarray:
    """``e^u - 1 - u`` without cancellation for small |u|."""
    u = np.asarray(u, dtype=float)
    out = np.expm1(u) - u
    small = np.abs(u) < 1e-2
    us = u[small]
    out[small] = us * us * (0.5 + us * (1 / 6 + us * (1 / 24 + us * (1 / 120 + us / 720))))
    return out


def integrate_pbar(f: Callable[[np.ndarray], np.ndarray],
                   f_fourier: Callable[[np.ndarray], complex] | None, k, s: float,
                   box: DomainBox, tol: float = 1e-10,
                   budget: int = DEFAULT_BUDGET) -> PbarResult:
    """Subtracted whole-space integral and the reconstructed ``P(k)``.

    Integrates ``(e^(-|k|^s f) - 1 + |k|^s f) e^(ik.x)`` over ``box`` and
    returns it together with ``P = Pbar - |k|^s f~(k)``.  ``f`` maps (n, d)
    arrays to values; the box must be wide enough that ``|k|^(2s) f^2 / 2``
    is negligible outside it.
    """
    if f_fourier is None:
        raise ValueError("integrate_pbar needs the closed-form Fourier transform of f")
    if box.d > 3:
        raise UnsupportedDimensionError(f"integrate_pbar supports d <= 3, got d = {box.d}")
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    kmag = float(np.linalg.norm(kv))
    if kmag == 0:
        raise ValueError("k = 0 carries a delta term and is excluded")
    big = kmag ** s

    def amp(X):
        return _subtracted_exp(-big * np.asarray(f(X), dtype=float))

    res = _integrate_field(amp, kv, box.lo, box.hi, big, tol, _Budget(budget))
    fourier_term = big * complex(f_fourier(kv))
    return PbarResult(res, fourier_term, res.value - fourier_term)


def _grid(box: DomainBox, grid_n: int) -> np.ndarray:
    axes = [np.linspace(a, b, grid_n) for a, b in zip(box.lo, box.hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _sphere(eps: float, d: int, n: int) -> np.ndarray:
    if d == 1:
        return np.array([[-eps], [eps]])
    if d == 2:
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return eps * np.stack([np.cos(t), np.sin(t)], axis=-1)
    rng = np.random.default_rng(0)
    v = rng.standard_normal((n * n, d))
    return eps * v / np.linalg.norm(v, axis=1, keepdims=True)


def _default_grid_n(d: int) -> int:
    return {1: 2001, 2: 301}.get(d, 61)


def _outside_ball(f, eps, box, grid_n):
    if grid_n is None:
        grid_n = _default_grid_n(box.d)
    pts = _grid(box, grid_n)
    pts = pts[np.linalg.norm(pts, axis=1) >= eps]
    ring = _sphere(eps, box.d, grid_n)
    inside = np.all((ring >= np.array(box.lo)) & (ring <= np.array(box.hi)), axis=1)
    pts = np.concatenate([pts, ring[inside]])
    return np.asarray(f(pts), dtype=float)


def inf_rho(f, eps: float, box: DomainBox, grid_n: int | None = None) -> float:
    """Grid infimum of ``f(x) - f(0)`` over the box outside the open eps-ball."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    f0 = float(np.asarray(f(np.zeros((1, box.d))))[0])
    vals = _outside_ball(f, eps, box, grid_n)
    rho = float(np.min(vals) - f0) if vals.size else math.inf
    if rho <= 0:
        log.warning("isolated-minimum condition violated: rho(%g) = %g", eps, rho)
    return rho


def inf_sigma(f, eps: float, box: DomainBox, grid_n: int | None = None,
              envelope: Callable[[float], float] | None = None) -> float:
    """Grid infimum of ``|f(0)| - |f(x)|`` outside the eps-ball.

    ``envelope(r)`` bounds ``sup |f(x)|`` over ``|x| >= r`` and covers the
    region outside the box, starting at the box's inscribed radius.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    f0 = float(np.asarray(f(np.zeros((1, box.d))))[0])
    if not f0 < 0:
        raise ValueError(f"inf_sigma needs f(0) < 0, got {f0}")
    vals = _outside_ball(f, eps, box, grid_n)
    sigma = float(abs(f0) - np.max(np.abs(vals))) if vals.size else math.inf
    if envelope is not None:
        r_in = min(min(-a, b) for a, b in zip(box.lo, box.hi))
        sigma = min(sigma, abs(f0) - float(envelope(max(r_in, eps))))
    if sigma <= 0:
        log.warning("whole-space condition violated: sigma(%g) = %g", eps, sigma)
    return sigma


def _check_tail_args(f0: float, sigma: float, C: float):
    if not C >= 0:
        raise ValueError(f"C must be non-negative, got {C}")
    if not abs(f0) > sigma:
        raise ValueError(f"needs |f0| > sigma, got |f0| = {abs(f0)}, sigma = {sigma}")


def exterior_tail_bound(C: float, f0: float, sigma: float, k_mag: float, s: float) -> float:
    """Bound on the subtracted integral outside the ball.

    ``C/(|f0|-sigma)^2 * (e^(-K q) - 1 + K q)`` with ``K = |k|^s`` and
    ``q = f0 + sigma``.
    """
    _check_tail_args(f0, sigma, C)
    big = k_mag ** s
    q = f0 + sigma
    u = -big * q
    braces = float(_subtracted_exp(np.array([u]))[0])
    return C / (abs(f0) - sigma) ** 2 * braces


def exterior_tail_bound_asymptotic(C: float, f0: float, sigma: float, k_mag: float,
                                   s: float, *, log_value: bool = False) -> float:
    """Large-|k| form ``C/(|f0|-sigma)^2 e^(-|k|^s (f0+sigma))``, optionally as a log."""
    _check_tail_args(f0, sigma, C)
    lv = math.log(C) - 2 * math.log(abs(f0) - sigma) - k_mag ** s * (f0 + sigma)
    return lv if log_value else math.exp(lv)

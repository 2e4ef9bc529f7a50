"""One-dimensional expansion engine.

The phase function near its minimum is ``f(x) = f_crit + sum_j a_j x^(j+alpha)``
and the amplitude is ``x^(beta-1) e^(ikx)``.  Summing the Laplace expansion
over all powers of ``ik`` at fixed derivative order ``m`` gives the symbols
``I_m(lambda, k)``; the integral behaves like ``e^(-lambda f_crit)/alpha *
sum_m I_m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    SeriesDivergenceError,
    SeriesValue,
    fox_wright_1psi0,
    hyp0f2,
    hyp1f1,
    ln_gamma,
    sum_series,
)

__all__ = [
    "Domain",
    "ExpansionSpec1D",
    "SymbolValue",
    "Correction12",
    "x_alpha",
    "bell_polynomial",
    "d_coeff",
    "d_coeff_oracle",
    "symbol_Im",
    "symbol_Im_direct",
    "symbol_Im_two_sided",
    "leading_symbol_closed_form",
    "corrections_AB",
    "asym_P_1d",
    "decay_order_Im",
    "erdelyi_decay_order",
]

DOMAIN_KINDS = ("one_sided", "two_sided", "real_line")


def _is_even_integer(x: float) -> bool:
    return float(x).is_integer() and int(x) % 2 == 0


@dataclass(frozen=True)
class Domain:
    """Integration domain: ``(0, b)``, ``(-b1, b2)`` or the whole line."""

    kind: str
    b: float | None = None
    b1: float | None = None
    b2: float | None = None

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "one_sided" and not (self.b is not None and self.b > 0):
            raise ValueError("one_sided domain needs b > 0")
        if self.kind == "two_sided" and not (
                self.b1 is not None and self.b2 is not None and self.b1 > 0 and self.b2 > 0):
            raise ValueError("two_sided domain needs b1 > 0 and b2 > 0")

    @classmethod
    def one_sided(cls, b: float) -> "Domain":
        return cls("one_sided", b=float(b))

    @classmethod
    def two_sided(cls, b1: float, b2: float) -> "Domain":
        return cls("two_sided", b1=float(b1), b2=float(b2))

    @classmethod
    def real_line(cls) -> "Domain":
        return cls("real_line")

    def interval(self) -> tuple[float, float]:
        if self.kind == "one_sided":
            return 0.0, self.b
        if self.kind == "two_sided":
            return -self.b1, self.b2
        return -math.inf, math.inf

    def to_dict(self) -> dict:
        if self.kind == "one_sided":
            return {"kind": self.kind, "b": self.b}
        if self.kind == "two_sided":
            return {"kind": self.kind, "b1": self.b1, "b2": self.b2}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        kind = d["kind"]
        if kind == "one_sided":
            return cls.one_sided(d["b"])
        if kind == "two_sided":
            return cls.two_sided(d["b1"], d["b2"])
        return cls(kind)


@dataclass(frozen=True)
class ExpansionSpec1D:
    """Local data of a 1D problem with the critical point shifted to 0.

    ``a`` holds the expansion coefficients ``a_0, a_1, ...`` of
    ``f(x) - f_crit``; missing higher coefficients are treated as zero.
    """

    alpha: float
    beta: float
    a: tuple[float, ...]
    f_crit: float = 0.0
    domain: Domain = field(default_factory=lambda: Domain.one_sided(1.0))

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        if not self.a or not self.a[0] > 0:
            raise ValueError("leading coefficient a_0 must be positive")
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.domain.kind != "one_sided" and not _is_even_integer(self.alpha):
            raise ValueError("two-sided domains need an even integer alpha")
        if self.domain.kind == "real_line" and not self.f_crit < 0:
            raise ValueError("real_line domain needs f_crit < 0")

    @property
    def a0(self) -> float:
        return self.a[0]

    def coeff(self, j: int) -> float:
        return self.a[j] if j < len(self.a) else 0.0

    def bell_args(self, m: int) -> list[float]:
        """``[i! a_i / a_0 for i = 1..m]``: derivatives of the normalised series at 0."""
        return [math.factorial(i) * self.coeff(i) / self.a0 for i in range(1, m + 1)]

    def nu(self, n_index: int) -> float:
        return (n_index + self.beta) / self.alpha

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "a": list(self.a),
            "f_crit": self.f_crit,
            "domain": self.domain.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExpansionSpec1D":
        return cls(
            alpha=float(d["alpha"]),
            beta=float(d["beta"]),
            a=tuple(d["a"]),
            f_crit=float(d.get("f_crit", 0.0)),
            domain=Domain.from_dict(d["domain"]),
        )


@dataclass(frozen=True)
class SymbolValue:
    m: int
    lam: float
    k: float
    value: complex
    series: SeriesValue


@dataclass(frozen=True)
class Correction12:
    A: float
    B: float
    x2: float


def x_alpha(spec: ExpansionSpec1D, lam: float, k: float) -> float:
    """Combined scale ``4/(a_0 lambda) * (k/4)^alpha``."""
    if not (lam > 0 and k > 0):
        raise ValueError("x_alpha needs lambda > 0 and k > 0")
    return 4.0 / (spec.a0 * lam) * (k / 4.0) ** spec.alpha


def _partitions(m: int, j: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of m into exactly j parts, parts non-increasing."""
    if max_part is None:
        max_part = m
    if j == 0:
        if m == 0:
            yield ()
        return
    for first in range(min(m - j + 1, max_part), 0, -1):
        if first * j < m:
            break
        for rest in _partitions(m - first, j - 1, first):
            yield (first,) + rest


def bell_polynomial(m: int, j: int, x: Sequence[float]) -> float:
    """Partial exponential Bell polynomial ``B_{m,j}(x_1, ..., x_{m-j+1})``.

    Sums ``m! / prod(c_i! (i!)^c_i) * prod(x_i^c_i)`` over the multiplicities
    ``c_i`` with ``sum c_i = j`` and ``sum i c_i = m``.  The arguments may be
    floats or :class:`fractions.Fraction`; the result has the same type.
    """
    if m < 1 or not 1 <= j <= m:
        raise ValueError(f"bell_polynomial needs 1 <= j <= m, got m={m}, j={j}")
    if len(x) < m - j + 1:
        raise ValueError(f"B_{m},{j} needs {m - j + 1} arguments, got {len(x)}")
    total = 0 * x[0]
    fact_m = math.factorial(m)
    for parts in _partitions(m, j):
        counts: dict[int, int] = {}
        for p in parts:
            counts[p] = counts.get(p, 0) + 1
        denom = 1
        term = 1
        for i, c in counts.items():
            denom *= math.factorial(c) * math.factorial(i) ** c
            term *= x[i - 1] ** c
        total += (fact_m // denom) * term
    return total


def d_coeff(spec: ExpansionSpec1D, m: int, n_index: int, nu: float | None = None) -> float:
    """``m``-th derivative at 0 of ``(1 + sum_j (a_j/a_0) x^j)^(-nu)``.

    Faa di Bruno form: ``sum_j (-1)^j Gamma(nu+j)/Gamma(nu) B_{m,j}(...)``.
    ``nu`` defaults to ``(n_index + beta)/alpha``.  The terms alternate and
    grow like ``nu^m``, so the sum is formed exactly in rationals built from
    the float inputs and rounded once.
    """
    if m < 0 or m > n_index:
        raise ValueError(f"d_coeff needs 0 <= m <= n_index, got m={m}, n={n_index}")
    if m == 0:
        return 1.0
    if nu is None:
        nu_q = (n_index + Fraction(spec.beta)) / Fraction(spec.alpha)
    else:
        nu_q = Fraction(nu)
    row = _bell_row(spec.a, m)
    total = Fraction(0)
    rising = Fraction(1)
    for j in range(1, m + 1):
        rising *= nu_q + (j - 1)
        total += (-1) ** j * rising * row[j - 1]
    return float(total)


@lru_cache(maxsize=256)
def _bell_row(a: tuple[float, ...], m: int) -> tuple[Fraction, ...]:
    """Exact ``B_{m,j}(1! a_1/a_0, 2! a_2/a_0, ...)`` for ``j = 1..m``."""
    a0 = Fraction(a[0])
    x = [math.factorial(i) * Fraction(a[i] if i < len(a) else 0.0) / a0
         for i in range(1, m + 1)]
    return tuple(bell_polynomial(m, j, x) for j in range(1, m + 1))


@lru_cache(maxsize=256)
def _log_series(a: tuple[float, ...], m: int) -> tuple[Fraction, ...]:
    """Exact Taylor coefficients of ``log(1 + sum_j (a_j/a_0) x^j)`` up to ``x^m``."""
    a0 = Fraction(a[0])
    c = [Fraction(1)] + [Fraction(a[j] if j < len(a) else 0.0) / a0 for j in range(1, m + 1)]
    # n L_n = n c_n - sum_{k=1}^{n-1} k L_k c_{n-k}
    log_s = [Fraction(0)] * (m + 1)
    for n in range(1, m + 1):
        acc = n * c[n] - sum((k * log_s[k] * c[n - k] for k in range(1, n)), Fraction(0))
        log_s[n] = acc / n
    return tuple(log_s)


def d_coeff_oracle(spec: ExpansionSpec1D, m: int, n_index: int,
                   nu: float | None = None) -> float:
    """Same quantity as :func:`d_coeff` via truncated power-series log/exp.

    The recurrences run in exact rationals: for random coefficients the
    answer can be many orders smaller than the intermediate series terms.
    """
    if m < 0 or m > n_index:
        raise ValueError(f"d_coeff needs 0 <= m <= n_index, got m={m}, n={n_index}")
    nu_q = (n_index + Fraction(spec.beta)) / Fraction(spec.alpha) if nu is None else Fraction(nu)
    g = [-nu_q * v for v in _log_series(spec.a, m)]
    # exp G:  n E_n = sum_{k=1}^n k G_k E_{n-k}
    e = [Fraction(1)] + [Fraction(0)] * m
    for n in range(1, m + 1):
        e[n] = sum((k * g[k] * e[n - k] for k in range(1, n + 1)), Fraction(0)) / n
    return float(math.factorial(m) * e[m])


def _check_one_sided_convergence(spec: ExpansionSpec1D, lam: float, k: float):
    if not (lam > 0 and k > 0):
        raise ValueError("symbols need lambda > 0 and k > 0")
    if spec.alpha == 1 and not k / (spec.a0 * lam) < 1:
        raise SeriesDivergenceError(
            f"alpha = 1 symbols need k/(a0 lambda) < 1, got {k / (spec.a0 * lam):.6g}")


def symbol_Im(spec: ExpansionSpec1D, m: int, lam: float, k: float,
              ctl: SeriesControl = DEFAULT_CONTROL) -> SymbolValue:
    """One-sided symbol ``I_m(lambda, k)`` as a Bell-weighted sum of 1Psi0 values.

    Each Fox-Wright function carries parameters ``((m+beta)/alpha + j, 1/alpha)``
    and argument ``ik / (a_0 lambda)^(1/alpha)``.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    _check_one_sided_convergence(spec, lam, k)
    scale = spec.a0 * lam
    z = 1j * k / scale ** (1.0 / spec.alpha)
    sigma = 1.0 / spec.alpha
    rho0 = (m + spec.beta) / spec.alpha
    log_pref = -math.lgamma(m + 1) - rho0 * math.log(scale)
    pref = math.exp(log_pref)

    if m == 0:
        weights = [(0, 1.0)]
    else:
        x = spec.bell_args(m)
        weights = [(j, (-1) ** j * bell_polynomial(m, j, x)) for j in range(1, m + 1)]

    total = 0j
    tail = 0.0
    used = 0
    converged = True
    for j, w in weights:
        if w == 0.0:
            continue
        psi = fox_wright_1psi0(rho0 + j, sigma, z, ctl)
        total += w * psi.value
        tail += abs(w) * psi.tail_estimate
        used = max(used, psi.terms_used)
        converged = converged and psi.converged
    meta = SeriesValue(pref * total, used, pref * tail, converged)
    return SymbolValue(m, lam, k, pref * total, meta)


def symbol_Im_direct(spec: ExpansionSpec1D, m: int, lam: float, k: float,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> SymbolValue:
    """One-sided ``I_m`` summed term by term with ``d_{m, n+m}``.

    Cross-check for :func:`symbol_Im`; the two differ only in the order in
    which the Bell sum and the series over ``n`` are taken.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    _check_one_sided_convergence(spec, lam, k)
    scale = spec.a0 * lam
    log_scale = math.log(scale)
    log_k = math.log(k)
    i_pow = (1, 1j, -1, -1j)

    def terms():
        n = 0
        while True:
            nu = (n + m + spec.beta) / spec.alpha
            log_mag = (ln_gamma(nu) - math.lgamma(n + 1) - math.lgamma(m + 1)
                       + n * log_k - nu * log_scale)
            yield math.exp(log_mag) * i_pow[n % 4] * d_coeff(spec, m, n + m, nu)
            n += 1

    res = sum_series(terms(), ctl)
    return SymbolValue(m, lam, k, res.value, res)


def symbol_Im_two_sided(spec: ExpansionSpec1D, m: int, lam: float, k: float,
                        ctl: SeriesControl = DEFAULT_CONTROL) -> SymbolValue:
    """Symbol ``I_m`` for a domain around the minimum, already doubled.

    Only even total powers survive for odd ``beta`` and odd powers for even
    ``beta``; the series is summed with that parity filter directly.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if not (lam > 0 and k > 0):
        raise ValueError("symbols need lambda > 0 and k > 0")
    if not _is_even_integer(spec.alpha):
        raise ValueError(f"two-sided symbols need an even integer alpha, got {spec.alpha}")
    if not (float(spec.beta).is_integer() and spec.beta >= 1):
        raise ValueError(f"two-sided symbols need a positive integer beta, got {spec.beta}")
    parity = 0 if int(spec.beta) % 2 == 1 else 1
    scale = spec.a0 * lam
    log_scale = math.log(scale)
    log_k = math.log(k)
    i_pow = (1, 1j, -1, -1j)
    n_start = -(-(m - parity) // 2)  # smallest n with 2n + parity >= m

    def terms():
        n = n_start
        while True:
            big_n = 2 * n + parity
            nu = (big_n + spec.beta) / spec.alpha
            p = big_n - m
            log_mag = (ln_gamma(nu) - nu * log_scale + p * log_k
                       - math.lgamma(m + 1) - math.lgamma(p + 1))
            yield 2.0 * math.exp(log_mag) * i_pow[p % 4] * d_coeff(spec, m, big_n, nu)
            n += 1

    res = sum_series(terms(), ctl)
    return SymbolValue(m, lam, k, res.value, res)


def _closed_form_alpha1(spec: ExpansionSpec1D, lam: float, k: float) -> complex:
    x1 = x_alpha(spec, lam, k)
    return math.gamma(spec.beta) * (x1 / (k * (1 - 1j * x1))) ** spec.beta


def _closed_form_alpha2(spec: ExpansionSpec1D, lam: float, k: float,
                        ctl: SeriesControl) -> complex:
    x2 = x_alpha(spec, lam, k)
    beta = int(spec.beta)
    base = 4.0 * x2 / k ** 2
    if beta % 2 == 1:
        l = (beta - 1) // 2
        f = hyp1f1(l + 0.5, 0.5, -x2, ctl).value.real
        return 2.0 * base ** (l + 0.5) * math.gamma(l + 0.5) * f
    l = beta // 2
    f = hyp1f1(l + 0.5, 1.5, -x2, ctl).value.real
    return 2j * k * base ** (l + 0.5) * math.gamma(l + 0.5) * f


def _closed_form_alpha4(spec: ExpansionSpec1D, lam: float, k: float,
                        ctl: SeriesControl) -> complex:
    x4 = x_alpha(spec, lam, k)
    f1 = hyp0f2(0.5, 0.75, x4 / 4.0, ctl).value.real
    f2 = hyp0f2(1.25, 1.5, x4 / 4.0, ctl).value.real
    return (2.0 * math.sqrt(2.0) * x4 ** 0.25 / k
            * (2.0 * math.gamma(0.25) * f1 - 8.0 * math.sqrt(x4) * math.gamma(0.75) * f2))


def leading_symbol_closed_form(spec: ExpansionSpec1D, lam: float, k: float,
                               ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Closed forms of ``I_0`` where they are known.

    ``alpha = 1`` on a one-sided domain (binomial form), ``alpha = 2`` with
    integer ``beta`` (Kummer functions) and ``alpha = 4, beta = 1`` (two 0F2
    terms) on two-sided domains.
    """
    if spec.alpha == 1 and spec.domain.kind == "one_sided":
        return _closed_form_alpha1(spec, lam, k)
    if spec.domain.kind != "one_sided":
        if spec.alpha == 2 and float(spec.beta).is_integer():
            return _closed_form_alpha2(spec, lam, k, ctl)
        if spec.alpha == 4 and spec.beta == 1:
            return _closed_form_alpha4(spec, lam, k, ctl)
    raise ValueError(
        f"no closed form for alpha={spec.alpha}, beta={spec.beta}, domain={spec.domain.kind}")


def _require_quadratic(spec: ExpansionSpec1D):
    if spec.alpha != 2 or spec.beta != 1:
        raise ValueError(f"needs alpha = 2 and beta = 1, got alpha={spec.alpha}, beta={spec.beta}")


def corrections_AB(spec: ExpansionSpec1D, lam: float, k: float) -> Correction12:
    """First and second relative corrections for ``alpha = 2``, ``beta = 1``.

    ``I_1/I_0 = iA/k`` and ``I_2/I_0 = B/k^2`` hold exactly, for every
    ``lambda`` and ``k``.
    """
    _require_quadratic(spec)
    if spec.domain.kind == "one_sided":
        raise ValueError("corrections_AB applies to two-sided domains")
    x2 = x_alpha(spec, lam, k)
    r1 = spec.coeff(1) / spec.a0
    r2 = spec.coeff(2) / spec.a0
    A = r1 * x2 * (2 * x2 - 3)
    B = (-r2 * x2 * (4 * x2 ** 2 - 12 * x2 + 3)
         - 0.25 * r1 ** 2 * x2 * (8 * x2 ** 3 - 60 * x2 ** 2 + 90 * x2 - 15))
    return Correction12(A, B, x2)


def asym_P_1d(spec: ExpansionSpec1D, s: float, k: float, order: int = 2) -> complex:
    """Asymptotic value of ``int e^(-k^s f(x)) e^(ikx) dx`` around a quadratic minimum.

    ``order`` selects how many of the relative corrections ``iA/k`` and
    ``B/k^2`` are kept.
    """
    _require_quadratic(spec)
    if spec.domain.kind == "one_sided":
        raise ValueError("asym_P_1d needs a two-sided or real_line domain")
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    if not s >= 2:
        raise ValueError(f"s must be >= 2, got {s}")
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    lam = k ** s
    corr = corrections_AB(spec, lam, k)
    bracket = 1.0 + 0j
    if order >= 1:
        bracket += 1j * corr.A / k
    if order >= 2:
        bracket += corr.B / k ** 2
    log_mag = -lam * spec.f_crit - 0.5 * s * math.log(k) - corr.x2
    return math.exp(log_mag) * math.sqrt(math.pi / spec.a0) * bracket


def decay_order_Im(spec: ExpansionSpec1D, m: int, s: float) -> float:
    """Predicted power of k in ``I_m(k^s, k)``: ``-s (m + beta)/alpha``."""
    return -(s * m + s * spec.beta) / spec.alpha


def erdelyi_decay_order(spec: ExpansionSpec1D, n: int, s: float) -> float:
    """Power of k in the n-th term of the unresummed Laplace series at lambda = k^s."""
    return -(s * n + s * spec.beta) / spec.alpha + n

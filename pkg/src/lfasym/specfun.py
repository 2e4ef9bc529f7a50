"""Special-function kernel: log-gamma, gamma at half integers, 1F1, 0F2 and
the Fox-Wright function 1Psi0.

Every series goes through :func:`sum_series`, which applies one truncation
rule and compensated accumulation so that the callers do not each invent
their own stopping criterion.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

__all__ = [
    "SeriesControl",
    "SeriesValue",
    "SeriesDivergenceError",
    "SeriesTruncationError",
    "sum_series",
    "ln_gamma",
    "gamma_ratio",
    "gamma_half_integer",
    "hyp1f1",
    "hyp0f2",
    "fox_wright_1psi0",
]

# Number of consecutive negligible terms required before stopping.
_QUIET_RUN = 3


class SeriesTruncationError(ArithmeticError):
    """Raised when a series does not meet its tolerance within ``max_terms``.

    The partial result is kept on ``self.partial`` for inspection.
    """

    def __init__(self, message: str, partial: "SeriesValue"):
        super().__init__(message)
        self.partial = partial


class SeriesDivergenceError(ArithmeticError):
    """Raised when the arguments lie outside a series' convergence region."""


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-14
    max_terms: int = 10000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    terms_used: int
    tail_estimate: float
    converged: bool

    @property
    def real(self) -> float:
        return self.value.real


class _TwoSum:
    """Neumaier-compensated complex accumulator."""

    __slots__ = ("re", "im", "c_re", "c_im")

    def __init__(self):
        self.re = self.im = 0.0
        self.c_re = self.c_im = 0.0

    @staticmethod
    def _add(s, c, x):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        return t, c

    def add(self, z: complex):
        self.re, self.c_re = self._add(self.re, self.c_re, z.real)
        self.im, self.c_im = self._add(self.im, self.c_im, z.imag)

    @property
    def total(self) -> complex:
        return complex(self.re + self.c_re, self.im + self.c_im)


def sum_series(terms: Iterable[complex], ctl: SeriesControl = DEFAULT_CONTROL,
               *, raise_on_failure: bool = True) -> SeriesValue:
    """Sum ``terms`` until three consecutive non-increasing terms are all
    below ``ctl.rel_tol`` times the running sum.

    A finite iterator that runs out is an exact (terminating) series.
    """
    acc = _TwoSum()
    quiet = 0
    prev_mag = math.inf
    last_mag = math.inf
    n = 0
    it: Iterator[complex] = iter(terms)
    for n in range(1, ctl.max_terms + 1):
        try:
            t = next(it)
        except StopIteration:
            return SeriesValue(acc.total, n - 1, 0.0, True)
        acc.add(complex(t))
        last_mag = abs(t)
        total = abs(acc.total)
        if last_mag <= ctl.rel_tol * total and last_mag <= prev_mag:
            quiet += 1
            if quiet >= _QUIET_RUN:
                return SeriesValue(acc.total, n, last_mag, True)
        else:
            quiet = 0
        prev_mag = last_mag
    partial = SeriesValue(acc.total, n, last_mag, False)
    if raise_on_failure:
        raise SeriesTruncationError(
            f"series not converged after {n} terms (last |term| = {last_mag:.3e})",
            partial)
    return partial


def ln_gamma(x: float) -> float:
    """Natural log of Gamma(x) for real x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"ln_gamma requires a finite positive argument, got {x}")
    return math.lgamma(x)


def gamma_ratio(x: float, a: float) -> float:
    """Gamma(x + a) / Gamma(x) without forming either gamma value.

    Small non-negative integer offsets use the rising factorial, which is
    exact to rounding; everything else goes through log-gamma differences.
    """
    if float(a).is_integer() and 0 <= a <= 64:
        out = 1.0
        for i in range(int(a)):
            out *= x + i
        return out
    return math.exp(ln_gamma(x + a) - ln_gamma(x))


def gamma_half_integer(n: int) -> float:
    """Gamma(n + 1/2) = (2n)! sqrt(pi) / (n! 4^n), with the rational part exact."""
    if n < 0:
        raise ValueError(f"gamma_half_integer requires n >= 0, got {n}")
    ratio = Fraction(math.factorial(2 * n), math.factorial(n) * 4 ** n)
    return float(ratio) * math.sqrt(math.pi)


def _is_nonpositive_integer(b: float) -> bool:
    return b <= 0 and float(b).is_integer()


def _hyp1f1_terms(a, b, z):
    t = 1.0
    n = 0
    while True:
        yield t
        if t == 0.0:
            return
        t *= (a + n) / ((b + n) * (n + 1)) * z
        n += 1


def hyp1f1(a: float, b: float, z: float,
           ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesValue:
    """Kummer's function 1F1(a; b; z) from its power series.

    For ``z < 0`` the series is evaluated as ``e^z 1F1(b-a; b; -z)``; the
    direct alternating series loses all digits once ``|z|`` exceeds ~20.
    """
    if _is_nonpositive_integer(b):
        raise ValueError(f"1F1 undefined for b = {b}")
    if z < 0 and not _is_nonpositive_integer(a):
        res = sum_series(_hyp1f1_terms(b - a, b, -z), ctl)
        scale = math.exp(z)
        return SeriesValue(res.value * scale, res.terms_used,
                           res.tail_estimate * scale, res.converged)
    return sum_series(_hyp1f1_terms(a, b, z), ctl)


def _hyp0f2_terms(b1, b2, z):
    t = 1.0
    n = 0
    while True:
        yield t
        if t == 0.0:
            return
        t *= z / ((b1 + n) * (b2 + n) * (n + 1))
        n += 1


def hyp0f2(b1: float, b2: float, z: float,
           ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesValue:
    """0F2(; b1, b2; z) by direct summation."""
    if _is_nonpositive_integer(b1) or _is_nonpositive_integer(b2):
        raise ValueError(f"0F2 undefined for b1={b1}, b2={b2}")
    return sum_series(_hyp0f2_terms(b1, b2, z), ctl)


def fox_wright_terms(rho: float, sigma: float, z: complex) -> Iterator[complex]:
    """Terms Gamma(rho + n sigma) z^n / n! of the 1Psi0 series."""
    z = complex(z)
    if z == 0:
        yield complex(math.gamma(rho)) if rho < 171 else complex(math.exp(ln_gamma(rho)))
        return
    log_abs_z = math.log(abs(z))
    phase = cmath.phase(z)
    # purely imaginary arguments get exact powers of i
    i_powers = (1, 1j, -1, -1j) if z.real == 0 and z.imag > 0 else (
        (1, -1j, -1, 1j) if z.real == 0 else None)
    n = 0
    while True:
        mag = math.exp(ln_gamma(rho + n * sigma) - math.lgamma(n + 1) + n * log_abs_z)
        if i_powers is None:
            yield cmath.rect(mag, n * phase)
        else:
            yield mag * i_powers[n % 4]
        n += 1


def fox_wright_1psi0(rho: float, sigma: float, z: complex,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesValue:
    """Fox-Wright function 1Psi0[(rho, sigma); z] = sum Gamma(rho + n sigma) z^n / n!.

    Converges for every z when ``sigma < 1`` and inside the unit disk when
    ``sigma == 1``; for ``sigma > 1`` the radius of convergence is zero.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if sigma > 1 and z != 0:
        raise SeriesDivergenceError(
            f"1Psi0 diverges for sigma = {sigma} > 1 and z != 0")
    if sigma == 1 and abs(z) >= 1:
        raise SeriesDivergenceError(
            f"1Psi0 with sigma = 1 needs |z| < 1, got |z| = {abs(z)}")
    return sum_series(fox_wright_terms(rho, sigma, z), ctl)

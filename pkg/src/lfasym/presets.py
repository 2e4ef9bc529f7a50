"""Catalogue of test problems with known local data.

Evaluators take an ``(n, d)`` array of points and return ``n`` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .multidim import HessianModel
from .oracle import DomainBox
from .series1d import Domain, ExpansionSpec1D

__all__ = ["Preset", "preset_catalog", "get_preset", "preset_from_spec1d", "PresetLookupError"]

Field = Callable[[np.ndarray], np.ndarray]


class PresetLookupError(KeyError):
    pass


@dataclass(frozen=True)
class Preset:
    name: str
    d: int
    evaluator: Field
    box: DomainBox
    spec1d: ExpansionSpec1D | None = None
    hessian: HessianModel | None = None
    fourier_transform: Callable[[np.ndarray], complex] | None = None
    l2_norm_sq: float | None = None
    envelope: Callable[[float], float] | None = None
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if self.spec1d is None and self.hessian is None:
            raise ValueError(f"preset {self.name!r} needs spec1d or hessian data")

    @property
    def whole_space(self) -> bool:
        return self.fourier_transform is not None

    def f1d(self, x: np.ndarray) -> np.ndarray:
        """1D view of the evaluator for scalar-argument quadrature."""
        return self.evaluator(np.asarray(x, dtype=float)[:, None])


def _sq(X: np.ndarray) -> np.ndarray:
    return np.sum(np.asarray(X, dtype=float) ** 2, axis=1)


def preset_from_spec1d(spec: ExpansionSpec1D, name: str = "custom",
                       box: DomainBox | None = None) -> Preset:
    """Polynomial preset ``f(x) = f_crit + sum_j a_j x^(j + alpha)`` from a spec."""
    coeffs = np.array(spec.a)
    powers = np.arange(len(coeffs)) + spec.alpha

    def f(X):
        x = np.asarray(X, dtype=float)[:, 0]
        return spec.f_crit + np.power(x[:, None], powers[None, :]) @ coeffs

    if box is None:
        lo, hi = spec.domain.interval()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("a whole-line spec needs an explicit box")
        box = DomainBox((lo,), (hi,))
    hess = None
    if spec.alpha == 2:
        hess = HessianModel(1, spec.f_crit, np.array([[2.0 * spec.a0]]))
    return Preset(name, 1, f, box, spec1d=spec, hessian=hess,
                  description="polynomial from a 1D expansion spec")


def _negative_gaussian(d: int) -> Preset:
    def f(X):
        return -np.exp(-_sq(X))

    def ft(k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return -math.pi ** (d / 2) * math.exp(-float(k @ k) / 4)

    spec = None
    if d == 1:
        spec = ExpansionSpec1D(2, 1, (1.0, 0.0, -0.5, 0.0, 1.0 / 6.0), -1.0, Domain.real_line())
    name = "negative-gaussian" if d == 1 else f"negative-gaussian-{d}d"
    return Preset(
        name, d, f, DomainBox.cube(8.0 if d == 1 else 6.0, d),
        spec1d=spec,
        hessian=HessianModel(d, -1.0, 2.0 * np.eye(d)),
        fourier_transform=ft,
        l2_norm_sq=(math.pi / 2) ** (d / 2),
        envelope=lambda r: math.exp(-r * r),
        description="f = -exp(-|x|^2) on the whole space",
    )


def preset_catalog() -> list[Preset]:
    gauss = ExpansionSpec1D(2, 1, (1.0,), 0.0, Domain.two_sided(6, 6))
    quartic = ExpansionSpec1D(4, 1, (1.0,), 0.0, Domain.two_sided(1, 1))
    cubic = ExpansionSpec1D(2, 1, (1.0, 0.3, 0.2), 0.0, Domain.two_sided(3, 3))
    A2 = np.array([[2.0, 1.0], [1.0, 3.0]])

    presets = [
        preset_from_spec1d(gauss, "gauss1d"),
        preset_from_spec1d(quartic, "quartic1d"),
        preset_from_spec1d(cubic, "cubic-perturbed"),
        preset_from_spec1d(ExpansionSpec1D(2, 2, (1.0,), 0.0, Domain.two_sided(6, 6)),
                           "gauss1d-beta2"),
        preset_from_spec1d(ExpansionSpec1D(2, 3, (1.0,), 0.0, Domain.two_sided(6, 6)),
                           "gauss1d-beta3"),
        _negative_gaussian(1),
        _negative_gaussian(2),
        Preset("spd2d", 2, lambda X: 0.5 * np.einsum("ni,ij,nj->n", X, A2, X),
               DomainBox.cube(8.0, 2), hessian=HessianModel(2, 0.0, A2),
               description="f = x^T A x / 2 with A = [[2, 1], [1, 3]]"),
    ]
    return presets


def get_preset(name: str) -> Preset:
    for p in preset_catalog():
        if p.name == name:
            return p
    names = ", ".join(p.name for p in preset_catalog())
    raise PresetLookupError(f"unknown preset {name!r}; available: {names}")

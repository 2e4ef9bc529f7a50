"""Asymptotic-versus-quadrature sweeps, slope fits and tabular reports."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .multidim import asym_P_nd
from .oracle import DEFAULT_BUDGET, integrate_1d, integrate_nd, integrate_pbar, inf_rho, inf_sigma
from .presets import Preset
from .series1d import asym_P_1d, leading_symbol_closed_form, symbol_Im_two_sided

__all__ = [
    "SweepRow",
    "FitError",
    "PresetCheckError",
    "CSV_HEADER",
    "geometric_grid",
    "asymptotic_value",
    "oracle_value",
    "self_check",
    "run_sweep",
    "fit_decay_slope",
    "emit_report",
    "format_rows",
]

CSV_HEADER = ["k", "s", "re_asym", "im_asym", "re_oracle", "im_oracle", "abs_err", "rel_err"]


class FitError(ValueError):
    pass


class PresetCheckError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    k: float
    s: float
    p_asym: complex
    p_oracle: complex
    abs_err: float
    rel_err: float
    oracle_converged: bool = True

    @classmethod
    def build(cls, k, s, p_asym, p_oracle, converged=True) -> "SweepRow":
        abs_err = abs(p_asym - p_oracle)
        rel_err = abs_err / abs(p_oracle) if abs(p_oracle) > 0 else math.inf
        return cls(float(k), float(s), complex(p_asym), complex(p_oracle),
                   abs_err, rel_err, bool(converged))


def geometric_grid(k_min: float, k_max: float, count: int) -> list[float]:
    if count < 1:
        raise ValueError("k-count must be >= 1")
    if not 0 < k_min <= k_max:
        raise ValueError(f"need 0 < k_min <= k_max, got {k_min}, {k_max}")
    if count == 1:
        return [float(k_min)]
    return [float(v) for v in np.geomspace(k_min, k_max, count)]


def _direction(preset: Preset, k_dir) -> np.ndarray:
    if k_dir is None:
        v = np.ones(preset.d)
    else:
        v = np.asarray(k_dir, dtype=float)
        if v.shape != (preset.d,):
            raise ValueError(f"k-dir needs {preset.d} components for preset {preset.name}")
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("k-dir must be non-zero")
    return v / n


def asymptotic_value(preset: Preset, s: float, k: float, order: int = 0,
                     k_dir=None) -> complex:
    """Asymptotic ``P(k)`` for the preset at magnitude ``k`` along ``k_dir``."""
    spec = preset.spec1d
    if preset.d == 1 and spec is not None:
        if spec.alpha == 2 and spec.beta == 1:
            return asym_P_1d(spec, s, k, order)
        lam = k ** s
        total = leading_symbol_closed_form(spec, lam, k)
        for m in range(1, order + 1):
            total += symbol_Im_two_sided(spec, m, lam, k).value
        return math.exp(-lam * spec.f_crit) * total / spec.alpha
    if preset.hessian is None:
        raise ValueError(f"preset {preset.name} has no data for an asymptotic formula")
    return asym_P_nd(preset.hessian, s, k * _direction(preset, k_dir))


def oracle_value(preset: Preset, s: float, k: float, tol: float = 1e-10,
                 budget: int = DEFAULT_BUDGET, k_dir=None):
    """Quadrature value of ``P(k)``; returns ``(value, converged, detail)``."""
    kvec = k * _direction(preset, k_dir)
    lam = k ** s
    if preset.whole_space:
        res = integrate_pbar(preset.evaluator, preset.fourier_transform, kvec, s,
                             preset.box, tol, budget)
        return res.p, res.pbar.converged, res
    if preset.d == 1:
        beta = preset.spec1d.beta if preset.spec1d is not None else 1.0
        res = integrate_1d(preset.f1d, beta, float(kvec[0]), lam,
                           (preset.box.lo[0], preset.box.hi[0]), tol, budget)
        return res.value, res.converged, res
    res = integrate_nd(preset.evaluator, kvec, lam, preset.box, tol, budget)
    return res.value, res.converged, res


def self_check(preset: Preset, eps: float = 0.1) -> dict:
    """Isolated-minimum (and, for whole-space presets, decay) conditions on a grid."""
    out = {"rho": inf_rho(preset.evaluator, eps, preset.box)}
    if out["rho"] <= 0:
        raise PresetCheckError(f"preset {preset.name}: rho({eps}) = {out['rho']:.3g} <= 0")
    if preset.whole_space:
        out["sigma"] = inf_sigma(preset.evaluator, eps, preset.box, envelope=preset.envelope)
        if out["sigma"] <= 0:
            raise PresetCheckError(
                f"preset {preset.name}: sigma({eps}) = {out['sigma']:.3g} <= 0")
    return out


def run_sweep(preset: Preset, s: float, k_grid: Sequence[float], order: int = 0,
              tol: float = 1e-10, budget: int = DEFAULT_BUDGET, k_dir=None,
              workers: int = 1, check: bool = True) -> list[SweepRow]:
    """Asymptotic versus quadrature ``P(k)`` on ``k_grid``, rows in ascending k."""
    if check:
        self_check(preset)
    ks = sorted(float(k) for k in k_grid)

    def one(k):
        p_asym = asymptotic_value(preset, s, k, order, k_dir)
        p_orc, ok, _ = oracle_value(preset, s, k, tol, budget, k_dir)
        return SweepRow.build(k, s, p_asym, p_orc, ok)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, ks))
    return [one(k) for k in ks]


def fit_decay_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log ys`` against ``log xs``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 4:
        raise FitError("slope fit needs at least 4 paired points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("slope fit needs positive abscissae and ordinates")
    lx = np.log(x)
    if np.ptp(lx) == 0:
        raise FitError("abscissae are degenerate")
    ly = np.log(y)
    lxc = lx - lx.mean()
    return float(np.dot(lxc, ly - ly.mean()) / np.dot(lxc, lxc))


def _g17(v: float) -> str:
    return f"{v:.17g}"


def _row_dict(r: SweepRow) -> dict:
    return {
        "k": r.k,
        "s": r.s,
        "p_asym": {"re": r.p_asym.real, "im": r.p_asym.imag},
        "p_oracle": {"re": r.p_oracle.real, "im": r.p_oracle.imag},
        "abs_err": r.abs_err,
        "rel_err": r.rel_err,
        "oracle_converged": r.oracle_converged,
    }


def format_rows(rows: Sequence[SweepRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_g17(v) for v in (r.k, r.s, r.p_asym.real, r.p_asym.imag,
                                          r.p_oracle.real, r.p_oracle.imag,
                                          r.abs_err, r.rel_err)])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([_row_dict(r) for r in rows], indent=2) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(rows: Sequence[SweepRow], fmt: str = "csv", path: str | Path | None = None):
    """Write rows as CSV or JSON to ``path`` (stdout for ``None`` or ``"-"``)."""
    text = format_rows(rows, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    try:
        p.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {p}: {exc}") from exc

"""Command-line harness.

Examples::

    lfasym sweep --preset cubic-perturbed --s 3 --k-min 4 --k-max 32 --k-count 6 --order 2
    lfasym domain-ext --preset negative-gaussian --s 2 --k-min 4 --k-max 12 --k-count 5
    lfasym decay-fit --preset cubic-perturbed --s 3 --k-min 8 --k-max 128 --k-count 5
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .multidim import asym_P_nd
from .oracle import DEFAULT_BUDGET, exterior_tail_bound, inf_sigma
from .presets import Preset, get_preset, preset_from_spec1d
from .series1d import (
    ExpansionSpec1D,
    decay_order_Im,
    erdelyi_decay_order,
    symbol_Im,
    symbol_Im_two_sided,
)
from .specfun import SeriesDivergenceError, SeriesTruncationError
from .sweep import (
    SweepRow,
    _direction,
    asymptotic_value,
    emit_report,
    fit_decay_slope,
    geometric_grid,
    oracle_value,
    run_sweep,
    self_check,
)

log = logging.getLogger("lfasym")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

DEFAULTS = {
    "preset": "gauss1d",
    "s": 2.0,
    "k_min": 4.0,
    "k_max": 16.0,
    "k_count": 3,
    "k_dir": None,
    "order": 0,
    "tol": 1e-10,
    "budget": DEFAULT_BUDGET,
    "format": "csv",
    "out": "-",
    "m_max": 2,
    "lam": None,
    "sided": "one",
    "eps": 1.0,
    "workers": 1,
    "spec1d": None,
    "box": None,
}


class ConfigError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with option values")
    p.add_argument("--preset", default=S)
    p.add_argument("--s", type=float, default=S)
    p.add_argument("--k-min", type=float, default=S)
    p.add_argument("--k-max", type=float, default=S)
    p.add_argument("--k-count", type=int, default=S)
    p.add_argument("--k-dir", type=float, nargs="+", default=S,
                   help="direction of k in d > 1, normalised internally")
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--budget", type=int, default=S)
    p.add_argument("--format", choices=("csv", "json"), default=S)
    p.add_argument("--out", default=S, help="output path, '-' for stdout")
    p.add_argument("--workers", type=int, default=S)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lfasym",
                                 description="Laplace-Fourier asymptotics and quadrature checks")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("asym1d", "1D asymptotic values on a k-grid"),
        ("asymnd", "d-dimensional leading-order values on a k-grid"),
        ("oracle", "quadrature values on a k-grid"),
        ("sweep", "asymptotic versus quadrature table"),
        ("symbols", "symbols I_m and their successive ratios"),
        ("decay-fit", "fitted log-log slopes of |I_m(k^s, k)|"),
        ("domain-ext", "whole-space extension through the subtracted integral"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name in ("symbols", "decay-fit"):
            p.add_argument("--m-max", type=int, default=argparse.SUPPRESS)
            p.add_argument("--sided", choices=("one", "two"), default=argparse.SUPPRESS)
        if name == "symbols":
            p.add_argument("--lam", type=float, nargs="+", default=argparse.SUPPRESS,
                           help="lambda values at fixed k = k-min (default: lambda = k^s)")
        if name == "domain-ext":
            p.add_argument("--eps", type=float, default=argparse.SUPPRESS)
    return ap


def resolve_options(ns: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    opts = dict(DEFAULTS)
    given = vars(ns)
    if "config" in given:
        path = Path(given["config"])
        try:
            cfg = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        for key, val in cfg.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            opts[key] = val
    for key, val in given.items():
        if key in DEFAULTS:
            opts[key] = val
    return opts


def _preset(opts: dict) -> Preset:
    if opts["spec1d"] is not None:
        spec = ExpansionSpec1D.from_dict(opts["spec1d"])
        box = None
        if opts["box"] is not None:
            from .oracle import DomainBox
            box = DomainBox(tuple(opts["box"][0]), tuple(opts["box"][1]))
        return preset_from_spec1d(spec, "custom", box)
    return get_preset(opts["preset"])


def _grid(opts: dict) -> list[float]:
    return geometric_grid(float(opts["k_min"]), float(opts["k_max"]), int(opts["k_count"]))


def _write_table(header: list[str], rows: list[list], opts: dict):
    fmt = opts["format"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
        text = buf.getvalue()
    else:
        text = json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    if opts["out"] in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(opts["out"]).write_text(text, encoding="utf-8")


def cmd_asym(opts: dict, nd: bool) -> int:
    preset = _preset(opts)
    s = float(opts["s"])
    rows = []
    for k in _grid(opts):
        if nd:
            if preset.hessian is None:
                raise ConfigError(f"preset {preset.name} has no Hessian data")
            kvec = k * _direction(preset, opts["k_dir"])
            v = asym_P_nd(preset.hessian, s, kvec)
        else:
            if preset.spec1d is None:
                raise ConfigError(f"preset {preset.name} has no 1D expansion data")
            v = asymptotic_value(preset, s, k, int(opts["order"]))
        rows.append([k, s, v.real, v.imag])
    _write_table(["k", "s", "re_asym", "im_asym"], rows, opts)
    return EXIT_OK


def cmd_oracle(opts: dict) -> int:
    preset = _preset(opts)
    s = float(opts["s"])
    rows = []
    bad = False
    for k in _grid(opts):
        val, ok, res = oracle_value(preset, s, k, float(opts["tol"]), int(opts["budget"]),
                                    opts["k_dir"])
        q = res.pbar if hasattr(res, "pbar") else res
        rows.append([k, s, val.real, val.imag, q.abs_error_estimate, q.evaluations, ok])
        bad |= not ok
    _write_table(["k", "s", "re_oracle", "im_oracle", "abs_error_estimate",
                  "evaluations", "converged"], rows, opts)
    return EXIT_NOT_CONVERGED if bad else EXIT_OK


def cmd_sweep(opts: dict) -> int:
    preset = _preset(opts)
    rows = run_sweep(preset, float(opts["s"]), _grid(opts), int(opts["order"]),
                     float(opts["tol"]), int(opts["budget"]), opts["k_dir"],
                     workers=int(opts["workers"]))
    emit_report(rows, opts["format"], opts["out"])
    return EXIT_OK if all(r.oracle_converged for r in rows) else EXIT_NOT_CONVERGED


def _symbol(spec, sided, m, lam, k):
    if sided == "two":
        return symbol_Im_two_sided(spec, m, lam, k).value
    return symbol_Im(spec, m, lam, k).value


def cmd_symbols(opts: dict) -> int:
    preset = _preset(opts)
    spec = preset.spec1d
    if spec is None:
        raise ConfigError(f"preset {preset.name} has no 1D expansion data")
    s = float(opts["s"])
    if opts["lam"] is not None:
        k0 = float(opts["k_min"])
        points = [(float(lam), k0) for lam in opts["lam"]]
    else:
        points = [(k ** s, k) for k in _grid(opts)]
    rows = []
    for lam, k in points:
        prev = None
        for m in range(int(opts["m_max"]) + 1):
            v = _symbol(spec, opts["sided"], m, lam, k)
            ratio = abs(v / prev) if prev not in (None, 0) else math.nan
            rows.append([m, lam, k, v.real, v.imag, ratio])
            prev = v
    _write_table(["m", "lambda", "k", "re", "im", "abs_ratio_to_previous"], rows, opts)
    return EXIT_OK


def cmd_decay_fit(opts: dict) -> int:
    preset = _preset(opts)
    spec = preset.spec1d
    if spec is None:
        raise ConfigError(f"preset {preset.name} has no 1D expansion data")
    s = float(opts["s"])
    ks = _grid(opts)
    rows = []
    for m in range(int(opts["m_max"]) + 1):
        ys = [abs(_symbol(spec, opts["sided"], m, k ** s, k)) for k in ks]
        slope = fit_decay_slope(ks, ys)
        pred = decay_order_Im(spec, m, s)
        rows.append([m, slope, pred, erdelyi_decay_order(spec, m, s),
                     abs(slope - pred) / abs(pred)])
    _write_table(["m", "fitted_slope", "predicted_slope", "erdelyi_slope", "rel_dev"],
                 rows, opts)
    return EXIT_OK


def cmd_domain_ext(opts: dict) -> int:
    preset = _preset(opts)
    if not preset.whole_space or preset.hessian is None:
        raise ConfigError(f"preset {preset.name} has no whole-space data")
    self_check(preset)
    s = float(opts["s"])
    eps = float(opts["eps"])
    sigma = inf_sigma(preset.evaluator, eps, preset.box, envelope=preset.envelope)
    rows = []
    log_ratios = []
    for k in _grid(opts):
        kvec = k * _direction(preset, opts["k_dir"])
        p_asym = asym_P_nd(preset.hessian, s, kvec)
        p, ok, _ = oracle_value(preset, s, k, float(opts["tol"]), int(opts["budget"]),
                                opts["k_dir"])
        rows.append(SweepRow.build(k, s, p_asym, p, ok))
        bound = exterior_tail_bound(preset.l2_norm_sq, preset.hessian.f0, sigma, k, s)
        log_ratios.append(math.log(bound) - math.log(abs(p_asym)))
    emit_report(rows, opts["format"], opts["out"])
    errs = [r.rel_err for r in rows]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    msg = f"sigma({eps:g}) = {sigma:.6g}; rel_err monotone decreasing: {monotone}"
    if len(rows) >= 2:
        xs = np.array([r.k ** s for r in rows])
        slope = float(np.polyfit(xs, np.array(log_ratios), 1)[0])
        msg += f"; tail-bound log-ratio slope vs |k|^s = {slope:.6g} (-sigma = {-sigma:.6g})"
    print(msg, file=sys.stderr)
    return EXIT_OK if all(r.oracle_converged for r in rows) else EXIT_NOT_CONVERGED


COMMANDS = {
    "asym1d": lambda o: cmd_asym(o, nd=False),
    "asymnd": lambda o: cmd_asym(o, nd=True),
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "symbols": cmd_symbols,
    "decay-fit": cmd_decay_fit,
    "domain-ext": cmd_domain_ext,
}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(ns)
        return COMMANDS[ns.command](opts)
    except (ValueError, KeyError, SeriesDivergenceError, SeriesTruncationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())

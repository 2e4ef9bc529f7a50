"""Asymptotics of Laplace-Fourier integrals ``int e^(-|k|^s f(x)) e^(ik.x) dx``
with brute-force quadrature checks."""
from .multidim import HessianModel, asym_J_nd, asym_P_nd, jacobi_eigen
from .oracle import DomainBox, QuadratureResult, integrate_1d, integrate_nd, integrate_pbar
from .presets import Preset, get_preset, preset_catalog
from .series1d import (
    Domain,
    ExpansionSpec1D,
    asym_P_1d,
    corrections_AB,
    symbol_Im,
    symbol_Im_two_sided,
)
from .specfun import SeriesControl, SeriesValue, fox_wright_1psi0, hyp0f2, hyp1f1
from .sweep import SweepRow, emit_report, fit_decay_slope, run_sweep

__version__ = "0.1.0"

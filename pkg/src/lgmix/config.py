"""Centralized numerical tolerances.

One frozen record holds every default tolerance used by the linear-algebra
kernel and its consumers, so experiments and tests reference a single
source of truth instead of scattering magic numbers.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # relative accuracy contract for the largest singular value
    operator_norm_rtol: float = 1e-10
    # symmetry / PSD slack accepted by the matrix square root
    symmetry_atol: float = 1e-10
    # ||S @ S - m|| <= psd_sqrt_rtol * (1 + ||m||)
    psd_sqrt_rtol: float = 1e-8
    # Moore-Penrose condition residuals
    pinv_rtol: float = 1e-8
    # pseudo-inverse singular-value cutoff, relative to sigma_1
    pinv_cutoff: float = 1e-12
    # ||A^T P A - P + I|| <= lyapunov_rtol * ||P||
    lyapunov_rtol: float = 1e-8
    # accumulation stops once the certified series tail is below this * ||P||
    lyapunov_tail_rtol: float = 1e-14
    # series terms allowed before declaring non-convergence
    lyapunov_max_terms: int = 500_000
    # spectral-radius estimates >= 1 - this margin are treated as unstable
    stability_margin: float = 1e-6
    # invariant-subspace residual contract for constructed systems
    subspace_rtol: float = 1e-8
    # OLS data matrices with sigma_n/sigma_1 below this are ill posed
    ols_sv_ratio: float = 1e-12
    # simulated states beyond this norm abort with an overflow error
    state_overflow: float = 1e150
    # norm traces switch to log-space bookkeeping beyond this magnitude
    norm_trace_linear_cap: float = 1e100


DEFAULT_TOLERANCES = Tolerances()

"""Dense real linear-algebra kernel.

Matrices are plain ``numpy.ndarray`` objects (dense, real, 2-D). This module
supplies every primitive the rest of the package consumes: operator norms,
singular spectra, PSD square roots, pseudo-inverses, the discrete Lyapunov
solve for the stationary covariance, and a Gelfand-style spectral-radius
estimate. All functions are pure; nothing here mutates its inputs.

No general eigendecomposition is offered: recovering Jordan structure from
an arbitrary numeric matrix is ill posed, so block-structure knowledge only
ever enters through explicitly constructed systems (see ``lgmix.spectral``).
For arbitrary matrices, only norm-based quantities are available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConvergenceError, InvalidInputError, UnstableSystemError

__all__ = [
    "SvdResult",
    "as_matrix",
    "operator_norm",
    "singular_values",
    "psd_sqrt",
    "pseudo_inverse",
    "solve_lyapunov",
    "stationary_covariance",
    "gelfand_radius",
]


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array, raising InvalidInputError otherwise."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def _require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class SvdResult:
    """Non-increasing singular spectrum plus optional factors.

    When ``u``/``vt`` are present, ``u @ diag(singular_values) @ vt``
    reconstructs the input to within a small multiple of sigma_1.
    """

    singular_values: np.ndarray
    u: np.ndarray | None = None
    vt: np.ndarray | None = None

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0])

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])

    @property
    def condition_number(self) -> float:
        smin = self.sigma_min
        return math.inf if smin == 0.0 else self.sigma_max / smin


def operator_norm(m) -> float:
    """Largest singular value sigma_1(m) (the matrix 2-norm)."""
    a = as_matrix(m)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def singular_values(m, compute_factors: bool = False) -> SvdResult:
    """Full singular spectrum of ``m``, non-increasing.

    For square invertible input, the least singular value equals
    ``1 / ||m^-1||``.
    """
    a = as_matrix(m)
    if compute_factors:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        return SvdResult(singular_values=s, u=u, vt=vt)
    return SvdResult(singular_values=np.linalg.svd(a, compute_uv=False))


def psd_sqrt(m, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Symmetric PSD square root S of a symmetric PSD matrix, S @ S = m.

    Computed from the symmetric eigendecomposition; eigenvalues that are
    negative beyond the tolerance budget are rejected, tiny negatives from
    round-off are clipped to zero.
    """
    a = _require_square(as_matrix(m))
    scale = float(np.abs(a).max()) if a.size else 0.0
    asym = float(np.abs(a - a.T).max())
    if asym > tol.symmetry_atol * (1.0 + scale):
        raise InvalidInputError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    sym = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(sym)
    if w[0] < -tol.symmetry_atol * (1.0 + max(w[-1], 0.0)):
        raise InvalidInputError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)


def pseudo_inverse(m, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``tol.pinv_cutoff * sigma_1`` are treated as zero.
    """
    a = as_matrix(m)
    return np.linalg.pinv(a, rcond=tol.pinv_cutoff)


def solve_lyapunov(a, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Solve A^T P A - P + I = 0 for the unique positive-definite P.

    Requires spectral radius rho(A) < 1 (checked with ``gelfand_radius``).
    P is the series ``sum_l (A^l)^T (A^l)``, accumulated term by term with
    sequential powers M <- A M. Doubled squaring (M <- M @ M) would take
    exponentially fewer products, but squaring powers of a strongly
    non-normal matrix across its transient hump injects absolute errors of
    order eps * ||A^k||_peak^2 that no longer contract, corrupting P in the
    leading digits; the sequential rule keeps errors flowing through the
    same contractive dynamics and stays accurate.

    Accumulation stops once a certified bound on the remaining series tail
    drops below ``tol.lyapunov_tail_rtol * ||P||``: after the first K with
    ||A^K||_F <= 1/2, the tail from term L is at most
    peak^2 * K * (1/4)^floor(L/K) * 4/3.
    """
    a = _require_square(as_matrix(a))
    radius = gelfand_radius(a, max_power=1 << 20)
    if radius >= 1.0 - tol.stability_margin:
        raise UnstableSystemError(
            f"spectral radius estimate {radius:.8f} >= {1.0 - tol.stability_margin}"
        )
    n = a.shape[0]
    p = np.zeros((n, n))
    m = np.eye(n)
    peak_sq = 0.0  # running max of ||A^l||_F^2
    contract_k = None  # first l with ||A^l||_F <= 1/2
    for l in range(tol.lyapunov_max_terms):
        p += m.T @ m
        fro_sq = float(np.sum(m * m))
        peak_sq = max(peak_sq, fro_sq)
        if contract_k is None and l >= 1 and fro_sq <= 0.25:
            contract_k = l
        if contract_k is not None:
            # ||A^j||_2 <= ||A^K||_F^floor(j/K) * peak_F for all j
            tail = peak_sq * contract_k * 0.25 ** ((l + 1) // contract_k) * (4.0 / 3.0)
            # max diagonal entry is a lower bound on ||P||_2 for PSD P
            if tail <= tol.lyapunov_tail_rtol * float(np.max(np.diag(p))):
                return 0.5 * (p + p.T)
        m = a @ m
    raise ConvergenceError(
        f"Lyapunov series not converged within {tol.lyapunov_max_terms} terms"
    )


def stationary_covariance(a, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Stationary covariance of x_{t+1} = A x_t + w_t with w_t ~ N(0, I).

    Equals ``sum_l A^l (A^l)^T``, i.e. the Lyapunov solution for A^T. The
    chain mixes to N(0, P) with this P; note it differs from
    ``solve_lyapunov(a)`` whenever A is not normal.
    """
    a = _require_square(as_matrix(a))
    return solve_lyapunov(a.T, tol=tol)


def gelfand_radius(a, max_power: int) -> float:
    """Spectral-radius estimate ``||A^k||^(1/k)`` at k = max_power.

    A convergent upper estimate of rho(A), not an eigenvalue computation:
    ``||A^k||^(1/k)`` decreases to rho(A) as k grows, slowly for matrices
    with large non-normal blocks. Powers are formed by binary powering with
    running norm rescaling, so intermediate overflow cannot occur and the
    returned estimate (which never exceeds ||A||) is always finite.
    """
    a = _require_square(as_matrix(a))
    if max_power < 8:
        raise InvalidInputError(f"max_power must be >= 8, got {max_power}")
    k = int(max_power)
    # scaled binary powering: track A^k / exp(log_scale)
    log_norm = _log_power_norm(a, k)
    return math.exp(log_norm / k)


def _log_power_norm(a: np.ndarray, k: int) -> float:
    """log ||A^k||, computed by scaled binary powering."""
    result = None  # rescaled accumulator for A^k
    log_result = 0.0
    base = a
    log_base = 0.0
    remaining = k
    while remaining > 0:
        if remaining & 1:
            if result is None:
                result, log_result = base.copy(), log_base
            else:
                result = result @ base
                log_result += log_base
                result, log_result = _rescale(result, log_result)
        remaining >>= 1
        if remaining > 0:
            base = base @ base
            log_base *= 2
            base, log_base = _rescale(base, log_base)
    norm = operator_norm(result)
    if norm == 0.0:
        return -math.inf
    return log_result + math.log(norm)


def _rescale(m: np.ndarray, log_scale: float) -> tuple[np.ndarray, float]:
    peak = float(np.abs(m).max())
    if peak == 0.0 or 1e-100 < peak < 1e100:
        return m, log_scale
    return m / peak, log_scale + math.log(peak)

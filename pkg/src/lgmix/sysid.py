"""Least-squares identification from a single trajectory.

The estimator is the closed form

    A_hat = X+ X-^T (X- X-^T)^-1,       X- = [x_0 .. x_{N-1}], X+ = [x_1 .. x_N],

computed through the pseudo-inverse so rank-deficient data degrades loudly
instead of silently. With the noise matrix retained the error obeys the
exact identity ||A - A_hat|| = ||E X-^T (X- X-^T)^-1|| and the bound
sigma_1(E) kappa(X-) / sigma_n(X-).

The experiments here probe how the singular values of the data matrix
concentrate in the three spectral regimes of the transition matrix, and run
the explosive-block case study in which least squares stays wrong no matter
how long the trajectory grows while a stable control improves steadily.
"""

from __future__ import annotations

import functools
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .concentration import (
    classify_sv_regime,
    clopper_pearson_upper,
    default_epsilon_grid,
    sv_tail_bound,
    talagrand_constant,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ContractViolationError,
    ExplosionOverflowError,
    IllPosedError,
    InvalidInputError,
)
from .linalg import as_matrix, operator_norm, pseudo_inverse, singular_values
from .parallel import map_trials
from .reports import ExperimentReport
from .rng import derive_seed, generator
from .simulate import Trajectory, gaussian_vector, simulate_trajectory
from .spectral import SpectralSpec, build_system

__all__ = [
    "OlsProblem",
    "OlsReport",
    "ols_problem_from_trajectory",
    "ols_estimate",
    "ols_error_report",
    "singular_value_concentration_experiment",
    "sv_spread_vs_length",
    "lipschitz_sv_property_test",
    "ols_case_study",
    "CASE_STUDY_BLOCKS",
    "CONTROL_LAMBDA1",
]

# explosive case-study structure: two eigenvalues, a dominant block of 47
# and a stable block of 3 in dimension 50
CASE_STUDY_BLOCKS = ((1.5, 47), (-0.5, 3))
# stable eigenvalue substituted for 1.5 in the control runs; 0.8 leaves the
# 47-block transient too ill-conditioned for double precision at N ~ 100
CONTROL_LAMBDA1 = 0.5


@dataclass(frozen=True)
class OlsProblem:
    """Data matrices for one regression: columns are consecutive states.

    When simulation-sourced, ``noise_matrix`` holds the float-exact
    residuals, so x_plus = true_a @ x_minus + noise_matrix holds bit-for-bit.
    """

    x_minus: np.ndarray
    x_plus: np.ndarray
    noise_matrix: np.ndarray | None = None
    true_a: np.ndarray | None = None

    def __post_init__(self):
        if self.x_minus.shape != self.x_plus.shape:
            raise InvalidInputError(
                f"shape mismatch: {self.x_minus.shape} vs {self.x_plus.shape}"
            )
        if self.noise_matrix is not None and self.noise_matrix.shape != self.x_minus.shape:
            raise InvalidInputError("noise matrix shape must match the data")

    @property
    def n_steps(self) -> int:
        return self.x_minus.shape[1]


@dataclass(frozen=True)
class OlsReport:
    """Scalar diagnostics of one regression."""

    a_hat: np.ndarray
    error_opnorm: float
    error_upper_bound: float
    sigma1_xminus: float
    sigman_xminus: float
    kappa_xminus: float
    sigma1_noise: float
    n_steps: int
    init_mode: str = ""

    def to_dict(self) -> dict:
        return {
            "error_opnorm": self.error_opnorm,
            "error_upper_bound": self.error_upper_bound,
            "sigma1_xminus": self.sigma1_xminus,
            "sigman_xminus": self.sigman_xminus,
            "kappa_xminus": self.kappa_xminus,
            "sigma1_noise": self.sigma1_noise,
            "n_steps": self.n_steps,
            "init_mode": self.init_mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def ols_problem_from_trajectory(traj: Trajectory, true_a=None) -> OlsProblem:
    """Slice a simulated trajectory into regression matrices."""
    states = traj.states
    noise = traj.noises.T if traj.noises is not None else None
    return OlsProblem(
        x_minus=states[:-1].T.copy(),
        x_plus=states[1:].T.copy(),
        noise_matrix=noise,
        true_a=np.asarray(true_a, dtype=float) if true_a is not None else traj.transition,
    )


def ols_estimate(
    p: OlsProblem,
    sv_ratio_threshold: float | None = DEFAULT_TOLERANCES.ols_sv_ratio,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Least-squares transition estimate X+ pinv(X-).

    Refuses data whose singular-value ratio sigma_n/sigma_1 falls below
    ``sv_ratio_threshold`` (raising IllPosedError with the spectrum); pass
    ``None`` to skip the check for diagnostics runs on explosive data where
    the collapse of the spectrum is itself the object of study.
    """
    x_minus = as_matrix(p.x_minus, "x_minus")
    spectrum = singular_values(x_minus).singular_values
    if sv_ratio_threshold is not None:
        if spectrum[-1] <= sv_ratio_threshold * spectrum[0]:
            raise IllPosedError(
                f"data matrix is numerically rank deficient "
                f"(sigma_n/sigma_1 = {spectrum[-1] / spectrum[0]:.3e})",
                singular_values=spectrum,
            )
    return as_matrix(p.x_plus, "x_plus") @ pseudo_inverse(x_minus, tol)


def ols_error_report(
    p: OlsProblem,
    sv_ratio_threshold: float | None = DEFAULT_TOLERANCES.ols_sv_ratio,
    identity_rtol: float = 1e-8,
    init_mode: str = "",
) -> OlsReport:
    """Estimate plus exact error, error identity check, and upper bound.

    Requires ``true_a`` and ``noise_matrix``. The directly computed error
    ||A - A_hat|| must match ||E pinv(X-)|| to ``identity_rtol`` (both are
    evaluated through the same pseudo-inverse); disagreement raises
    ContractViolationError since it signals the noise matrix is not the
    exact residual of the data.
    """
    if p.true_a is None or p.noise_matrix is None:
        raise InvalidInputError("error report requires true_a and noise_matrix")
    a_hat = ols_estimate(p, sv_ratio_threshold)
    direct = operator_norm(p.true_a - a_hat)
    via_noise = operator_norm(p.noise_matrix @ pseudo_inverse(p.x_minus))
    # both errors share the same pseudo-inverse; disagreement beyond the
    # relative tolerance (plus a machine-noise floor) means the retained
    # noise is not the exact residual of the data
    floor = 1e-10 * (1.0 + operator_norm(p.true_a))
    if abs(direct - via_noise) > identity_rtol * max(direct, via_noise) + floor:
        raise ContractViolationError(
            f"error identity violated: direct {direct:.12e} vs noise form {via_noise:.12e}"
        )
    spectrum = singular_values(p.x_minus).singular_values
    sigma1_e = operator_norm(p.noise_matrix)
    kappa = spectrum[0] / spectrum[-1] if spectrum[-1] > 0 else math.inf
    bound = sigma1_e * kappa / spectrum[-1] if spectrum[-1] > 0 else math.inf
    return OlsReport(
        a_hat=a_hat,
        error_opnorm=direct,
        error_upper_bound=bound,
        sigma1_xminus=float(spectrum[0]),
        sigman_xminus=float(spectrum[-1]),
        kappa_xminus=float(kappa),
        sigma1_noise=sigma1_e,
        n_steps=p.n_steps,
        init_mode=init_mode,
    )


# ---------------------------------------------------------------------------
# singular-value concentration
# ---------------------------------------------------------------------------

def _sv_sample(args, trial: int) -> float | None:
    a, n_steps, sv_index, seed = args
    n = a.shape[0]
    try:
        traj = simulate_trajectory(
            a, np.zeros(n), n_steps - 1, derive_seed(seed, 1, trial)
        )
    except ExplosionOverflowError:
        return None
    svs = np.linalg.svd(traj.states.T, compute_uv=False)
    return float(svs[sv_index])


def singular_value_concentration_experiment(
    a,
    n_steps: int,
    trials: int,
    which_sv,
    seed: int,
    epsilons=None,
    workers: int = 1,
) -> ExperimentReport:
    """Deviation tails of one singular value of the data matrix X-.

    Trials start at x_0 = 0 and record sigma_k(X-) for X- = [x_0 .. x_{N-1}].
    The regime (stable / marginal / explosive by ||A||) fixes the transport
    constant C and the deviations from the ensemble mean are compared with
    2 exp(-eps^2 / C). The centering uses the Monte-Carlo mean itself, since
    the expectation has no closed form. ``which_sv`` is 1-based, or "min"
    for the least singular value. Overflowing explosive trials are excluded
    and counted; bound versus spread ratios are reported so looseness stays
    visible.
    """
    a = as_matrix(a)
    if n_steps < 2:
        raise InvalidInputError("n_steps must be >= 2")
    if trials < 2:
        raise InvalidInputError("need at least 2 trials")
    started = time.perf_counter()
    n = a.shape[0]
    sv_index = n - 1 if which_sv == "min" else int(which_sv) - 1
    if not 0 <= sv_index < n:
        raise InvalidInputError(f"which_sv out of range for dimension {n}")

    norm_a = operator_norm(a)
    regime = classify_sv_regime(norm_a)
    constant = talagrand_constant(regime, norm_a=norm_a, n_steps=n_steps)

    args = (a, n_steps, sv_index, seed)
    samples = map_trials(functools.partial(_sv_sample, args), range(trials), workers)
    values = np.asarray([s for s in samples if s is not None])
    excluded = trials - values.size
    if values.size < 2:
        raise ExplosionOverflowError(
            "all but one trial overflowed; shorten n_steps", partial_states=None
        )
    mean = float(values.mean())
    deviations = np.abs(values - mean)

    if epsilons is None:
        epsilons = default_epsilon_grid(1.0 / constant)
    epsilons = np.asarray(sorted(float(e) for e in epsilons))

    rows = []
    for eps in epsilons:
        exceed = int(np.sum(deviations > eps))
        bound = sv_tail_bound(float(eps), constant, regime).bound_value
        tail = exceed / values.size
        rows.append(
            {
                "epsilon": float(eps),
                "empirical_tail": tail,
                "bound": bound,
                "trials": int(values.size),
                "cp_upper": clopper_pearson_upper(exceed, int(values.size)),
                "bound_to_tail_ratio": bound / tail if tail > 0 else math.inf,
            }
        )
    return ExperimentReport(
        name="sv-concentration",
        columns=["epsilon", "empirical_tail", "bound", "trials"],
        rows=rows,
        config={"n_steps": n_steps, "which_sv": which_sv, "trials": trials},
        seed=seed,
        trials=trials,
        regime=regime,
        extras={
            "norm_a": norm_a,
            "transport_constant": constant,
            "sv_mean": mean,
            "sv_std": float(values.std(ddof=1)),
            "excluded_overflow": excluded,
        },
        wall_clock_seconds=time.perf_counter() - started,
    )


def sv_spread_vs_length(
    a, n_steps_list, trials: int, which_sv, seed: int, workers: int = 1
) -> ExperimentReport:
    """Spread of sigma_k(X-) across trajectory lengths.

    For explosive systems the spread deteriorates as the trajectory grows,
    which is exactly why the least singular value stops concentrating and
    least squares stops improving; this report exhibits the trend.
    """
    a = as_matrix(a)
    n = a.shape[0]
    sv_index = n - 1 if which_sv == "min" else int(which_sv) - 1
    rows = []
    for n_steps in n_steps_list:
        args = (a, int(n_steps), sv_index, derive_seed(seed, 3, int(n_steps)))
        samples = map_trials(functools.partial(_sv_sample, args), range(trials), workers)
        values = np.asarray([s for s in samples if s is not None])
        rows.append(
            {
                "n_steps": int(n_steps),
                "sv_mean": float(values.mean()),
                "sv_std": float(values.std(ddof=1)),
                "excluded_overflow": trials - values.size,
            }
        )
    return ExperimentReport(
        name="sv-spread",
        columns=["n_steps", "sv_mean", "sv_std", "excluded_overflow"],
        rows=rows,
        config={"n_steps_list": [int(x) for x in n_steps_list], "which_sv": which_sv},
        seed=seed,
        trials=trials,
        regime=classify_sv_regime(operator_norm(a)),
    )


def lipschitz_sv_property_test(
    n: int, n_cols: int, trials: int, seed: int
) -> tuple[bool, float]:
    """Check that every singular value moves by at most the Frobenius norm
    of the data perturbation:  |sigma_k(X) - sigma_k(Y)| <= ||X - Y||_F.

    Perturbations cycle through fresh Gaussian pairs and rank-one bumps of
    magnitude 1e-3, 1, and 1e3. Returns (all ratios <= 1 + 1e-9, max ratio).
    """
    rng = generator(derive_seed(seed, 4))
    max_ratio = 0.0
    scales = (1e-3, 1.0, 1e3)
    for t in range(trials):
        x = rng.standard_normal((n, n_cols))
        if t % 2 == 0:
            y = rng.standard_normal((n, n_cols))
        else:
            u = rng.standard_normal(n)
            v = rng.standard_normal(n_cols)
            y = x + scales[t % len(scales)] * np.outer(u, v)
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            continue
        sx = np.linalg.svd(x, compute_uv=False)
        sy = np.linalg.svd(y, compute_uv=False)
        max_ratio = max(max_ratio, float(np.max(np.abs(sx - sy))) / dist)
    return max_ratio <= 1.0 + 1e-9, max_ratio


# ---------------------------------------------------------------------------
# explosive-block case study
# ---------------------------------------------------------------------------

def _case_study_errors(args, key: tuple) -> list:
    decomp_a, projector, n_grid, seed, label = args
    batch, trial = key
    n = decomp_a.shape[0]
    g = gaussian_vector(n, derive_seed(seed, 5, batch, trial), 0)
    x0 = projector @ g
    traj = simulate_trajectory(decomp_a, x0, max(n_grid), derive_seed(seed, 6, batch, trial))
    out = []
    for n_steps in n_grid:
        x_minus = traj.states[:n_steps].T
        x_plus = traj.states[1 : n_steps + 1].T
        a_hat = x_plus @ pseudo_inverse(x_minus)
        out.append(
            {
                "mode": label.format(batch="ab"[batch]),
                "N": int(n_steps),
                "trial": trial,
                "error_opnorm": operator_norm(decomp_a - a_hat),
            }
        )
    return out


def ols_case_study(
    trials_per_mode: int,
    n_grid,
    seed: int,
    lambda1: float = CASE_STUDY_BLOCKS[0][0],
    workers: int = 1,
) -> ExperimentReport:
    """Least-squares error versus trajectory length on the two-block system.

    The system has eigenvalue ``lambda1`` on a 47-block and -0.5 on a
    3-block (n = 50, orthogonal similarity). Each trial initializes at the
    projection of a fresh isotropic Gaussian onto one of the two invariant
    subspaces and records ||A - A_hat|| at every length in ``n_grid``
    (prefixes of one trajectory, so curves per trial are internally
    consistent). Two independent batches per initialization mode give four
    curves. The rank check is disabled on purpose: with the explosive
    default the data spectrum collapses, and that collapse is the result.

    With ``lambda1`` explosive the median error stalls; substituting the
    stable ``CONTROL_LAMBDA1`` makes it shrink with N.
    """
    if trials_per_mode < 1:
        raise InvalidInputError("trials_per_mode must be >= 1")
    n_grid = sorted(int(x) for x in n_grid)
    if not n_grid or n_grid[0] < 1:
        raise InvalidInputError("n_grid must hold positive lengths")
    started = time.perf_counter()
    blocks = ((float(lambda1), CASE_STUDY_BLOCKS[0][1]), CASE_STUDY_BLOCKS[1])
    spec = SpectralSpec(
        blocks=blocks, similarity="random-orthogonal", seed=derive_seed(seed, 7)
    )
    decomp = build_system(spec)

    rows = []
    for mode_idx, mode in enumerate(("E1", "E2")):
        projector = decomp.blocks[mode_idx].projector
        args = (decomp.a, projector, n_grid, derive_seed(seed, 8, mode_idx), mode + "-{batch}")
        keys = [(batch, trial) for batch in range(2) for trial in range(trials_per_mode)]
        for chunk in map_trials(functools.partial(_case_study_errors, args), keys, workers):
            rows.extend(chunk)

    rows.sort(key=lambda r: (r["mode"], r["N"], r["trial"]))
    medians = {}
    for mode in sorted({r["mode"] for r in rows}):
        for n_steps in n_grid:
            errs = [r["error_opnorm"] for r in rows if r["mode"] == mode and r["N"] == n_steps]
            medians[f"{mode}@N={n_steps}"] = float(np.median(errs))
    report = ExperimentReport(
        name="ols-case-study",
        columns=["mode", "N", "trial", "error_opnorm"],
        rows=rows,
        config={
            "trials_per_mode": trials_per_mode,
            "n_grid": n_grid,
            "lambda1": float(lambda1),
            "spec": spec.to_dict(),
        },
        seed=seed,
        trials=trials_per_mode,
        regime=classify_sv_regime(operator_norm(decomp.a)),
        extras={"medians": medians},
        wall_clock_seconds=time.perf_counter() - started,
    )
    return report

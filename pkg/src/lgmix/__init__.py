"""lgmix: a numerical laboratory for linear Gaussian dynamical systems.

Builds systems from declared Jordan block structure, computes their
invariant-subspace geometry and first contractive hitting times, simulates
raw and sub-sampled trajectories, evaluates closed-form mixing and
concentration bounds, and runs the seeded Monte-Carlo experiments that test
those bounds empirically, including the explosive-block least-squares
inconsistency case study.
"""

from .concentration import (
    LipschitzReward,
    TailBound,
    clopper_pearson_upper,
    correlation_decay_experiment,
    default_epsilon_grid,
    ergodic_average_experiment,
    iid_tail_bound,
    mixing_bound_check,
    projection_ratio_experiment,
    projection_tail_bound,
    subtraj_tail_bound,
    sv_tail_bound,
    talagrand_constant,
    wasserstein_gaussians,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ConstructionError,
    ContractViolationError,
    ConvergenceError,
    ExplosionOverflowError,
    IllPosedError,
    InvalidInputError,
    LgmixError,
    NotContractiveError,
    UnstableSystemError,
)
from .linalg import (
    SvdResult,
    gelfand_radius,
    operator_norm,
    pseudo_inverse,
    psd_sqrt,
    singular_values,
    solve_lyapunov,
    stationary_covariance,
)
from .reports import ExperimentReport
from .rng import derive_seed, generator
from .simulate import (
    NoiseModel,
    Trajectory,
    gaussian_vector,
    simulate_subtrajectory,
    simulate_trajectory,
    stationary_sample,
    subtrajectory_covariance,
)
from .spectral import (
    BlockSubspace,
    HittingTimeReport,
    InvariantDecomposition,
    SpectralSpec,
    block_hitting_time_bound,
    build_system,
    first_contractive_hitting_time,
    jordan_block,
    jordan_power_norm_bounds,
    worst_block_hitting_time,
)
from .sysid import (
    OlsProblem,
    OlsReport,
    lipschitz_sv_property_test,
    ols_case_study,
    ols_error_report,
    ols_estimate,
    ols_problem_from_trajectory,
    singular_value_concentration_experiment,
    sv_spread_vs_length,
)

__version__ = "0.1.0"

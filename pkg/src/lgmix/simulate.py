"""Seeded trajectory generation for linear Gaussian systems.

The chain is x_{t+1} = A x_t + w_t with i.i.d. w_t ~ N(0, I). Besides the
raw recursion this module provides the sub-sampled chain at a spacing k

    y_{i+1} = A^k y_i + s_i,     s_i ~ N(0, Sigma_k),
    Sigma_k = sum_{l=0}^{k-1} A^l (A^l)^T,

which is equal in law to reading every k-th state of the raw chain, and
direct i.i.d. sampling from the stationary law N(0, P). Everything is a
deterministic function of (seed, stream): noise for step t of a trajectory
comes from stream t, so any prefix of a run can be regenerated without
replaying the rest, and distinct trials never share draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import ContractViolationError, ExplosionOverflowError, InvalidInputError
from .linalg import as_matrix, operator_norm, psd_sqrt
from .rng import generator

__all__ = [
    "Trajectory",
    "NoiseModel",
    "gaussian_vector",
    "simulate_trajectory",
    "subtrajectory_covariance",
    "simulate_subtrajectory",
    "stationary_sample",
]


@dataclass(frozen=True)
class Trajectory:
    """States x_0..x_T (rows), their generating seed, and sampling spacing.

    ``noises`` holds the float-exact residuals states[t+1] - A @ states[t]
    (recomputed with the same matmul, so the identity is bit-for-bit); they
    differ from the raw Gaussian draws by at most one rounding. ``spacing``
    is 1 for the raw chain and k for a sub-sampled chain; ``transition`` is
    the one-step matrix actually applied (A, or A^k for sub-chains).
    """

    states: np.ndarray
    noises: np.ndarray | None
    seed: int
    spacing: int
    transition: np.ndarray

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def to_csv(self, path) -> None:
        """Write states as CSV with header t, x_0, ..., x_{n-1}."""
        n = self.dimension
        header = ",".join(["t"] + [f"x_{i}" for i in range(n)])
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for t, row in enumerate(self.states):
                fh.write(",".join([str(t)] + [repr(float(v)) for v in row]) + "\n")


@dataclass(frozen=True)
class NoiseModel:
    """Dimension and covariance of an additive Gaussian noise term."""

    dimension: int
    covariance: np.ndarray


def gaussian_vector(dim: int, seed: int, stream: int) -> np.ndarray:
    """Standard-normal vector, a pure function of (seed, stream).

    Draws come from PCG64 keyed by SeedSequence((seed, stream)); the
    generator choice is fixed so results are reproducible across runs and
    platforms.
    """
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}")
    return generator(seed, stream).standard_normal(dim)


def simulate_trajectory(
    a,
    x0,
    steps: int,
    seed: int,
    noise: bool = True,
    overflow=DEFAULT_TOLERANCES.state_overflow,
) -> Trajectory:
    """Run x_{t+1} = A x_t + w_t for ``steps`` steps from x0.

    With ``noise=False`` the draw is suppressed (pure power iteration on x0),
    which exposes the deterministic part of the superposition
    x_N = A^N x0 + sum_t A^{N-1-t} w_t. States whose norm exceeds the
    overflow guard abort with ExplosionOverflowError carrying the truncated
    trajectory; callers running explosive systems size ``steps`` accordingly.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("transition matrix must be square")
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    n = a.shape[0]
    x0 = np.asarray(x0, dtype=float).reshape(n)

    states = np.empty((steps + 1, n))
    states[0] = x0
    noises = np.empty((steps, n)) if noise else None
    for t in range(steps):
        drift = a @ states[t]
        if noise:
            nxt = drift + gaussian_vector(n, seed, t)
            noises[t] = nxt - drift  # float-exact residual
        else:
            nxt = drift
        norm = float(np.linalg.norm(nxt))
        if not np.isfinite(norm) or norm > overflow:
            raise ExplosionOverflowError(
                f"state norm {norm:.3e} exceeded overflow guard at step {t + 1}",
                partial_states=states[: t + 1].copy(),
            )
        states[t + 1] = nxt
    return Trajectory(states=states, noises=noises, seed=seed, spacing=1, transition=a)


def subtrajectory_covariance(a, k_hat: int) -> NoiseModel:
    """Accumulated noise covariance over k_hat raw steps:

        Sigma_k = sum_{l=0}^{k-1} A^l (A^l)^T,

    the exact finite sum (positive definite, >= I since the l=0 term is I).
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("transition matrix must be square")
    if k_hat < 1:
        raise InvalidInputError("k_hat must be >= 1")
    n = a.shape[0]
    sigma = np.zeros((n, n))
    power = np.eye(n)
    for _ in range(k_hat):
        sigma += power @ power.T
        power = a @ power
    return NoiseModel(dimension=n, covariance=0.5 * (sigma + sigma.T))


def simulate_subtrajectory(
    a,
    k_hat: int,
    x0,
    blocks: int,
    seed: int,
    sigma_sqrt: np.ndarray | None = None,
) -> Trajectory:
    """Simulate the spacing-k_hat chain y_{i+1} = A^k y_i + s_i directly.

    Equal in law to keeping every k_hat-th state of the raw chain. Requires
    ||A^k_hat|| < 1 (the contract that makes the sub-chain a contraction).
    ``sigma_sqrt`` may carry a precomputed PSD square root of Sigma_k so
    experiments can compute it once and share it across trials; for
    k_hat = 1 the noise is standard normal and the sub-chain reproduces
    ``simulate_trajectory`` draw-for-draw on a shared seed.
    """
    a = as_matrix(a)
    if k_hat < 1:
        raise InvalidInputError("k_hat must be >= 1")
    if blocks < 1:
        raise InvalidInputError("blocks must be >= 1")
    a_k = np.linalg.matrix_power(a, k_hat)
    norm_k = operator_norm(a_k)
    if norm_k >= 1.0:
        raise ContractViolationError(
            f"||A^{k_hat}|| = {norm_k:.6f} >= 1; spacing does not contract"
        )
    n = a.shape[0]
    if k_hat == 1:
        sigma_sqrt = np.eye(n)
    elif sigma_sqrt is None:
        sigma_sqrt = psd_sqrt(subtrajectory_covariance(a, k_hat).covariance)

    x0 = np.asarray(x0, dtype=float).reshape(n)
    states = np.empty((blocks + 1, n))
    states[0] = x0
    noises = np.empty((blocks, n))
    for i in range(blocks):
        drift = a_k @ states[i]
        nxt = drift + sigma_sqrt @ gaussian_vector(n, seed, i)
        noises[i] = nxt - drift
        states[i + 1] = nxt
    return Trajectory(
        states=states, noises=noises, seed=seed, spacing=k_hat, transition=a_k
    )


def stationary_sample(
    p_inf,
    count: int,
    seed: int,
    p_sqrt: np.ndarray | None = None,
) -> np.ndarray:
    """i.i.d. draws from N(0, P), returned as a (count, n) array.

    Draw i is ``sqrt(P) @ g_i`` with g_i keyed by (seed, i), so individual
    draws are reproducible by index. ``p_sqrt`` may carry a precomputed
    square root.
    """
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    if p_sqrt is None:
        p_sqrt = psd_sqrt(as_matrix(p_inf))
    n = p_sqrt.shape[0]
    out = np.empty((count, n))
    for i in range(count):
        out[i] = p_sqrt @ gaussian_vector(n, seed, i)
    return out

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgmix import (
    InvalidInputError,
    UnstableSystemError,
    gelfand_radius,
    jordan_block,
    operator_norm,
    pseudo_inverse,
    psd_sqrt,
    singular_values,
    solve_lyapunov,
    stationary_covariance,
)
from lgmix.spectral import build_system

from conftest import random_stable_spec


# --- independent oracles -----------------------------------------------------

def sigma1_2x2_upper_triangular(a: float, b: float) -> float:
    """Closed-form largest singular value of [[a, b], [0, a]]."""
    s1_sq = (2 * a * a + b * b + b * math.sqrt(b * b + 4 * a * a)) / 2.0
    return math.sqrt(s1_sq)


def jacobi_svd_values(m: np.ndarray, sweeps: int = 60, tol: float = 1e-14) -> np.ndarray:
    """One-sided Jacobi SVD: orthogonalize the columns of m by plane
    rotations; singular values are the resulting column norms."""
    a = np.array(m, dtype=float)
    if a.shape[0] < a.shape[1]:
        a = a.T
    n = a.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = a[:, p] @ a[:, p]
                beta = a[:, q] @ a[:, q]
                gamma = a[:, p] @ a[:, q]
                off = max(off, abs(gamma) / math.sqrt(alpha * beta + 1e-300))
                if abs(gamma) < tol * math.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                ap = a[:, p].copy()
                a[:, p] = c * ap - s * a[:, q]
                a[:, q] = s * ap + c * a[:, q]
        if off < tol:
            break
    return np.sort(np.linalg.norm(a, axis=0))[::-1]


# --- operator_norm -----------------------------------------------------------

def test_operator_norm_identity():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-12)


def test_operator_norm_2x2_closed_form():
    got = operator_norm([[0.9, 1.0], [0.0, 0.9]])
    assert got == pytest.approx(sigma1_2x2_upper_triangular(0.9, 1.0), rel=1e-10)
    assert got == pytest.approx(1.5296, abs=5e-5)


def test_operator_norm_zero():
    assert operator_norm(np.zeros((4, 4))) == 0.0


def test_operator_norm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        operator_norm([[np.nan, 0.0], [0.0, 1.0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_operator_norm_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((4, 5))
    b = rng.standard_normal((5, 3))
    assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-9


# --- singular_values ---------------------------------------------------------

def test_singular_values_diagonal():
    res = singular_values(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(res.singular_values, [3.0, 2.0, 1.0])


def test_singular_values_identity():
    res = singular_values(np.eye(5))
    assert np.allclose(res.singular_values, 1.0)


def test_singular_values_match_jacobi_oracle():
    rng = np.random.default_rng(42)
    m = rng.standard_normal((5, 8))
    got = singular_values(m).singular_values
    want = jacobi_svd_values(m)
    assert np.allclose(got, want, atol=1e-8)


def test_singular_values_factors_reconstruct():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((6, 4))
    res = singular_values(m, compute_factors=True)
    rebuilt = res.u @ np.diag(res.singular_values) @ res.vt
    assert operator_norm(m - rebuilt) <= 1e-10 * res.sigma_max


def test_least_singular_value_inverse_identity():
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = rng.standard_normal((5, 5)) + 3 * np.eye(5)
        smin = singular_values(m).sigma_min
        assert smin * operator_norm(np.linalg.inv(m)) == pytest.approx(1.0, abs=1e-6)


# --- psd_sqrt ----------------------------------------------------------------

def test_psd_sqrt_identity_and_scalar():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(psd_sqrt(4.0 * np.eye(2)), 2.0 * np.eye(2))


def test_psd_sqrt_2x2_eigen_oracle():
    # [[2,1],[1,2]] has eigenpairs (3, [1,1]/sqrt2) and (1, [1,-1]/sqrt2)
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    v = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    want = v @ np.diag([math.sqrt(3.0), 1.0]) @ v.T
    assert np.allclose(psd_sqrt(m), want, atol=1e-12)


def test_psd_sqrt_rejects_asymmetric_and_indefinite():
    with pytest.raises(InvalidInputError):
        psd_sqrt([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        psd_sqrt([[1.0, 0.0], [0.0, -1.0]])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_psd_sqrt_squares_back(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    g = rng.standard_normal((n, n))
    m = g @ g.T
    s = psd_sqrt(m)
    assert operator_norm(s @ s - m) <= 1e-8 * (1.0 + operator_norm(m))
    assert np.allclose(s, s.T)


# --- pseudo_inverse ----------------------------------------------------------

def test_pseudo_inverse_identity_and_rank_deficient():
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    assert np.allclose(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pseudo_inverse_penrose_conditions():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((4, 6))
    p = pseudo_inverse(m)
    assert operator_norm(m @ p @ m - m) <= 1e-8 * operator_norm(m)
    assert operator_norm(p @ m @ p - p) <= 1e-8 * operator_norm(p)
    assert operator_norm(m @ p - (m @ p).T) <= 1e-8
    assert operator_norm(p @ m - (p @ m).T) <= 1e-8
    # full-row-rank input: right inverse
    assert operator_norm(m @ p - np.eye(4)) <= 1e-8


# --- solve_lyapunov ----------------------------------------------------------

def test_lyapunov_zero_matrix():
    assert np.allclose(solve_lyapunov(np.zeros((3, 3))), np.eye(3))


def test_lyapunov_scalar_geometric():
    p = solve_lyapunov([[0.5]])
    assert p[0, 0] == pytest.approx(4.0 / 3.0, abs=1e-12)


def test_lyapunov_residual_on_random_stable_systems():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        spec = random_stable_spec(rng, max_blocks=2, max_size=5)
        a = build_system(spec).a
        p = solve_lyapunov(a)
        res = operator_norm(a.T @ p @ a - p + np.eye(a.shape[0]))
        assert res <= 1e-8 * operator_norm(p)
        assert np.linalg.eigvalsh(p).min() >= 1.0 - 1e-8


def test_lyapunov_rejects_unstable():
    with pytest.raises(UnstableSystemError):
        solve_lyapunov(np.eye(2))
    with pytest.raises(UnstableSystemError):
        solve_lyapunov([[1.5]])


def test_lyapunov_matches_schur_based_solver():
    from scipy.linalg import solve_discrete_lyapunov

    rng = np.random.default_rng(99)
    for _ in range(10):
        spec = random_stable_spec(rng, max_blocks=2, max_size=6)
        a = build_system(spec).a
        p = solve_lyapunov(a)
        reference = solve_discrete_lyapunov(a.T, np.eye(a.shape[0]))
        assert operator_norm(p - reference) <= 1e-8 * operator_norm(reference)


def test_stationary_covariance_matches_power_series(jordan_2x2_09):
    a = jordan_2x2_09.a
    p = stationary_covariance(a)
    direct = np.zeros((2, 2))
    m = np.eye(2)
    for _ in range(3000):
        direct += m @ m.T
        m = a @ m
    assert operator_norm(p - direct) <= 1e-8 * operator_norm(p)
    # the chain covariance is invariant: A P A^T + I = P
    assert operator_norm(a @ p @ a.T - p + np.eye(2)) <= 1e-8 * operator_norm(p)


# --- gelfand_radius ----------------------------------------------------------

def test_gelfand_diagonal_exact():
    assert gelfand_radius(np.diag([0.5, 0.2]), 64) == pytest.approx(0.5, abs=1e-12)


def test_gelfand_identity():
    assert gelfand_radius(np.eye(3), 256) == pytest.approx(1.0, abs=1e-12)


def test_gelfand_jordan_block_converges_down():
    a = jordan_block(0.9, 20)
    estimates = [gelfand_radius(a, 2**p) for p in (8, 10, 12, 14, 16)]
    # monotone decrease toward the true radius 0.9
    assert all(x > y for x, y in zip(estimates, estimates[1:]))
    assert all(e >= 0.9 for e in estimates)
    # frozen oracle values from iterating the norms directly
    assert estimates[2] == pytest.approx(0.9269060544, abs=1e-8)  # k = 4096
    assert gelfand_radius(a, 2**17) == pytest.approx(0.9, abs=0.01)


def test_gelfand_requires_min_power():
    with pytest.raises(InvalidInputError):
        gelfand_radius(np.eye(2), 4)

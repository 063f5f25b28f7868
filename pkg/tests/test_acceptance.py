"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints a single PASS/FAIL line (visible with ``pytest -s``); the
test name itself carries the criterion number so a plain ``pytest -v`` run
also reads as a checklist. Criteria with runtime budgets assert them.
"""

import functools
import json
import math
import time

import numpy as np
import pytest

from lgmix import (
    LipschitzReward,
    NotContractiveError,
    SpectralSpec,
    build_system,
    correlation_decay_experiment,
    default_epsilon_grid,
    ergodic_average_experiment,
    first_contractive_hitting_time,
    jordan_block,
    lipschitz_sv_property_test,
    mixing_bound_check,
    ols_case_study,
    ols_error_report,
    ols_estimate,
    ols_problem_from_trajectory,
    operator_norm,
    projection_ratio_experiment,
    projection_tail_bound,
    simulate_trajectory,
    solve_lyapunov,
    stationary_covariance,
    subtraj_tail_bound,
    worst_block_hitting_time,
)
from lgmix.cli import main as cli_main
from lgmix.sysid import CONTROL_LAMBDA1, OlsProblem

from conftest import random_stable_spec


def criterion(number, description):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"criterion {number:02d} [{description}]: FAIL")
                raise
            print(f"criterion {number:02d} [{description}]: PASS")

        return run

    return wrap


def binom_slack(tail: float, trials: int) -> float:
    return 3.0 * math.sqrt(tail * (1.0 - tail) / trials)


@criterion(1, "hitting-time curves and spot value")
def test_criterion_01_hitting_time_curves():
    started = time.perf_counter()
    curves = {}
    for lam in (0.86, 0.9):
        curves[lam] = [
            first_contractive_hitting_time(jordan_block(lam, n)).k_hat
            for n in range(2, 31)
        ]
    for lam, ks in curves.items():
        assert all(a < b for a, b in zip(ks, ks[1:])), f"not strictly increasing at {lam}"
    assert all(h > l for h, l in zip(curves[0.9], curves[0.86]))
    assert curves[0.9][0] == 35  # 2x2 block at 0.9

    # a size-1 block at the same eigenvalue does not move the hitting time:
    # the (n-1)+1 block arrangement matches the single (n-1) block
    for n in range(3, 31):
        spec = SpectralSpec(blocks=((0.9, n - 1), (0.9, 1)), similarity="identity", seed=0)
        k3 = first_contractive_hitting_time(build_system(spec).a).k_hat
        assert k3 == curves[0.9][(n - 1) - 2]
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"


@criterion(2, "worst-block bound is sufficient on 50 random specs")
def test_criterion_02_worst_block_sufficiency():
    rng = np.random.default_rng(271828)
    violations = 0
    for _ in range(50):
        spec = random_stable_spec(rng, max_blocks=3, max_size=12)
        bound = worst_block_hitting_time(spec.blocks)
        try:
            report = first_contractive_hitting_time(build_system(spec).a, k_max=bound)
        except NotContractiveError:
            violations += 1
            continue
        assert report.k_hat <= bound
    assert violations == 0


@criterion(3, "Lyapunov residuals and scalar value")
def test_criterion_03_lyapunov():
    p = solve_lyapunov([[0.5]])
    assert abs(p[0, 0] - 4.0 / 3.0) <= 1e-12
    rng = np.random.default_rng(314159)
    for _ in range(100):
        spec = random_stable_spec(rng, max_blocks=3, max_size=8)
        a = build_system(spec).a
        p = solve_lyapunov(a)
        residual = operator_norm(a.T @ p @ a - p + np.eye(a.shape[0]))
        assert residual <= 1e-8 * operator_norm(p)


@criterion(4, "Wasserstein contraction of the sub-sampled chain")
def test_criterion_04_mixing_contraction():
    d = build_system(SpectralSpec(blocks=((0.9, 2),), similarity="identity", seed=1))
    report = mixing_bound_check(d.a, k_hat=35, x0=[1.0, 0.0], m_max=10)
    lam = report.extras["lambda_k_hat"]
    rows = report.sorted_rows()
    violations = sum(r["bound_violated"] for r in rows)
    if violations:
        print(f"  note: {violations} closed-form bound rows exceeded (logged, not asserted)")
    for prev, nxt in zip(rows, rows[1:]):
        if prev["w2_exact"] > prev["numerical_floor"]:
            assert nxt["w2_exact"] <= (lam + 1e-6) * prev["w2_exact"]
        else:
            assert nxt["w2_exact"] <= nxt["numerical_floor"]


@criterion(5, "ergodic-average tails below their bounds at 1e4 trials")
def test_criterion_05_concentration_tails():
    started = time.perf_counter()
    scalar = np.array([[0.5]])
    run_scalar = ergodic_average_experiment(
        scalar, LipschitzReward.coordinate(0), n_samples=100, spacing=1,
        trials=10**4, seed=1001,
    )
    two = build_system(SpectralSpec(blocks=((0.9, 2),), similarity="identity", seed=1))
    # the default grid for this very flat bound sits at large epsilon; add a
    # few small thresholds so non-zero tails are exercised as well
    lam_max_two = float(np.linalg.eigvalsh(stationary_covariance(two.a)).max())
    coeff = 100 * (1 - 0.9740926065638588) ** 2 / (2 * lam_max_two)
    grid = sorted([0.5, 1.0, 2.0, 5.0] + list(default_epsilon_grid(coeff)))
    run_two = ergodic_average_experiment(
        two.a, LipschitzReward.coordinate(0), n_samples=100, spacing=35,
        trials=10**4, seed=1002, epsilons=grid,
    )
    for report in (run_scalar, run_two):
        base_se = report.extras["baseline_se"]
        lam_max = report.extras["lambda_max_pinf"]
        lam_sp = report.extras["lambda_spacing"]
        n_samples = report.config["n_samples"]
        for row in report.sorted_rows():
            # fold the baseline standard error into the threshold
            eps_adj = max(row["epsilon"] - 3.0 * base_se, 0.0)
            bound = subtraj_tail_bound(n_samples, eps_adj, lam_sp, lam_max).bound_value
            assert row["empirical_tail"] <= bound + binom_slack(
                row["empirical_tail"], row["trials"]
            ), f"{report.name} tail above bound at eps={row['epsilon']}"
    elapsed = time.perf_counter() - started
    assert elapsed < 300.0, f"took {elapsed:.1f}s"


@criterion(6, "scalar correlation decay matches the closed form")
def test_criterion_06_correlation_decay():
    report = correlation_decay_experiment(
        np.array([[0.5]]), LipschitzReward.coordinate(0), gap_max=10,
        trials=10**4, seed=1003,
    )
    for row in report.sorted_rows():
        k = row["lag"]
        closed_form = (4.0 / 3.0) * 0.5**k
        assert abs(row["empirical_cov"] - closed_form) <= 3.0 * row["stderr"]
        assert closed_form <= row["bound"] * (1.0 + 1e-12)  # the envelope is met with equality


@criterion(7, "projection geometry: typical ratio, tails, complement collapse")
def test_criterion_07_projection_geometry():
    spec100 = SpectralSpec(blocks=((0.9, 25), (0.5, 75)), similarity="random-orthogonal", seed=11)
    r100 = projection_ratio_experiment(build_system(spec100), 0, trials=10**4, seed=1004)
    mean_ratio = {r["statistic"]: r["value"] for r in r100.rows}["mean_ratio"]
    assert abs(mean_ratio - 0.5) <= 0.01  # within 2% of sqrt(25/100)

    spec1000 = SpectralSpec(blocks=((0.9, 250), (0.5, 750)), similarity="random-orthogonal", seed=12)
    r1000 = projection_ratio_experiment(
        build_system(spec1000), 0, trials=10**4, seed=1005, delta=0.2
    )
    stats = {r["statistic"]: r for r in r1000.rows}
    side = projection_tail_bound(1000, 250, 0.2)
    assert side == pytest.approx(0.0821, abs=2e-4)
    assert stats["upper_tail_freq"]["value"] <= side
    assert stats["lower_tail_freq"]["value"] <= side

    case = build_system(
        SpectralSpec(blocks=((1.5, 47), (-0.5, 3)), similarity="random-orthogonal", seed=7)
    )
    rcase = projection_ratio_experiment(case, 0, trials=10**4, seed=1006, n_steps=20)
    freq = {r["statistic"]: r["value"] for r in rcase.rows}[
        "complement_ratio_below_1e-3_freq"
    ]
    assert freq >= 0.99


@criterion(8, "least-squares error identity and bound, noiseless recovery")
def test_criterion_08_ols_identity_and_bound():
    systems = [
        np.array([[0.5]]),
        build_system(SpectralSpec(blocks=((0.9, 2),), similarity="identity", seed=1)).a,
    ]
    trials_per_system = 500
    for sys_idx, a in enumerate(systems):
        n = a.shape[0]
        for trial in range(trials_per_system):
            traj = simulate_trajectory(a, np.zeros(n), 60, seed=20_000 + 1000 * sys_idx + trial)
            problem = ols_problem_from_trajectory(traj, true_a=a)
            report = ols_error_report(problem)  # identity to 1e-8 enforced inside
            assert report.error_opnorm <= report.error_upper_bound + 1e-6

    rng = np.random.default_rng(5)
    a = 0.4 * rng.standard_normal((5, 5))
    x = rng.standard_normal((5, 40))
    noiseless = OlsProblem(x_minus=x, x_plus=a @ x, noise_matrix=np.zeros_like(x), true_a=a)
    assert operator_norm(a - ols_estimate(noiseless)) <= 1e-10


@criterion(9, "explosive case study stalls while the stable control improves")
def test_criterion_09_case_study_contrast():
    started = time.perf_counter()
    n_grid = [50, 75, 100]

    def curve_medians(report):
        by_curve = {}
        for row in report.rows:
            by_curve.setdefault(row["mode"], {}).setdefault(row["N"], []).append(
                row["error_opnorm"]
            )
        return {
            mode: [float(np.median(vals[n])) for n in n_grid]
            for mode, vals in by_curve.items()
        }

    explosive = ols_case_study(trials_per_mode=50, n_grid=n_grid, seed=42)
    for mode, medians in curve_medians(explosive).items():
        assert medians[-1] >= 0.5 * medians[0], f"{mode} error collapsed: {medians}"

    control = ols_case_study(
        trials_per_mode=50, n_grid=n_grid, seed=42, lambda1=CONTROL_LAMBDA1
    )
    for mode, medians in curve_medians(control).items():
        assert medians[0] > medians[1] > medians[2], f"{mode} not decreasing: {medians}"
    elapsed = time.perf_counter() - started
    assert elapsed < 600.0, f"took {elapsed:.1f}s"


@criterion(10, "singular values are 1-Lipschitz in the data matrix")
def test_criterion_10_lipschitz_singular_values():
    ok, max_ratio = lipschitz_sv_property_test(10, 30, trials=10**3, seed=77)
    assert ok
    assert max_ratio <= 1.0 + 1e-9


@criterion(11, "CLI runs are byte-identical under a fixed config and seed")
def test_criterion_11_cli_determinism(tmp_path):
    spec_small = {"blocks": [{"lambda": 0.5, "size": 1}], "similarity": "identity", "seed": 0}
    spec_block = {"blocks": [{"lambda": 0.9, "size": 2}], "similarity": "identity", "seed": 0}
    spec_proj = {
        "blocks": [{"lambda": 0.9, "size": 5}, {"lambda": 0.5, "size": 15}],
        "similarity": "random-orthogonal",
        "seed": 3,
    }
    configs = {
        "hitting-time": {"seed": 5, "lambda": 0.9, "n_min": 2, "n_max": 6},
        "mixing": {"seed": 5, "spec": spec_block, "k_hat": 35, "m_max": 5},
        "concentration": {"seed": 5, "spec": spec_small, "trials": 150, "n_samples": 20},
        "correlation": {"seed": 5, "spec": spec_small, "trials": 200, "gap_max": 5},
        "projection": {"seed": 5, "spec": spec_proj, "trials": 500},
        "ols": {"seed": 5, "spec": spec_block, "trials": 20, "n_steps": 50},
        "fig2": {"seed": 5, "trials_per_mode": 2, "n_grid": [50, 60]},
        "sv-concentration": {"seed": 5, "spec": spec_small, "trials": 200, "n_steps": 30},
    }
    for command, doc in configs.items():
        cfg = tmp_path / f"{command}.json"
        cfg.write_text(json.dumps(doc))
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{command}-{run}"
            code = cli_main([command, "--config", str(cfg), "--out", str(out)])
            assert code == 0, f"{command} exited {code}"
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        assert names == sorted(p.name for p in outs[1].iterdir())
        for name in names:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), (
                f"{command}/{name} differs between reruns"
            )

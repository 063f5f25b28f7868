"""Command-line entry point.

One experiment per invocation: a subcommand names it, a JSON config supplies
its parameters, and scalar flags (--seed, --trials, --out, --workers)
override the file. Every run writes three artifacts into the output
directory: a full-fidelity JSON report, a CSV of the report rows, and a
plot-ready CSV with the reduced column set a plotting tool wants. The seed
is mandatory; nothing is ever seeded from the clock, so rerunning a config
reproduces its outputs byte for byte.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
contract error (e.g. a power scan that never contracts).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import concentration as conc
from . import spectral, sysid
from .errors import InvalidInputError, LgmixError
from .linalg import as_matrix
from .reports import ExperimentReport

_COMMANDS = (
    "hitting-time",
    "mixing",
    "concentration",
    "correlation",
    "projection",
    "ols",
    "fig2",
    "sv-concentration",
)

_COMMON_KEYS = {"command", "seed", "trials", "out_dir", "workers", "spec", "matrix_path"}
_ALLOWED_KEYS = {
    "hitting-time": _COMMON_KEYS | {"lambda", "n_min", "n_max", "k_max"},
    "mixing": _COMMON_KEYS | {"k_hat", "m_max", "x0"},
    "concentration": _COMMON_KEYS | {"reward", "spacing", "n_samples", "epsilons"},
    "correlation": _COMMON_KEYS | {"reward", "gap_max", "spacing"},
    "projection": _COMMON_KEYS | {"block_index", "delta", "n_steps"},
    "ols": _COMMON_KEYS | {"n_steps"},
    "fig2": _COMMON_KEYS | {"trials_per_mode", "n_grid", "lambda1"},
    "sv-concentration": _COMMON_KEYS | {"n_steps", "which_sv", "epsilons", "n_steps_list"},
}

_PLOT_COLUMNS = {
    "hitting-time": ["n", "k_hat"],
    "mixing": ["m", "w2_exact", "bound"],
    "concentration": ["epsilon", "empirical_tail", "bound"],
    "correlation": ["lag", "empirical_cov", "bound"],
    "projection": ["statistic", "value", "reference"],
    "ols": ["trial", "error_opnorm"],
    "sv-concentration": ["epsilon", "empirical_tail", "bound"],
}


class ConfigError(Exception):
    """Configuration rejected before any computation ran."""


def _load_config(args) -> dict:
    config = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        try:
            config = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
    if "command" in config and config["command"] != args.command:
        raise ConfigError(
            f"config names command {config['command']!r} but {args.command!r} was invoked"
        )
    # flag > file precedence
    if args.seed is not None:
        config["seed"] = args.seed
    if args.trials is not None:
        config["trials"] = args.trials
    if args.out is not None:
        config["out_dir"] = args.out
    if args.workers is not None:
        config["workers"] = args.workers

    allowed = _ALLOWED_KEYS[args.command]
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys for {args.command}: {unknown}")
    if "seed" not in config:
        raise ConfigError("a seed is required (flag --seed or config field)")
    try:
        config["seed"] = int(config["seed"])
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {config['seed']!r}")
    if config["seed"] < 0:
        raise ConfigError("seed must be non-negative")
    config.setdefault("out_dir", "lgmix-out")
    config.setdefault("workers", 1)
    return config


def _resolve_system(config, need_spec: bool = False):
    """Return (matrix, decomposition-or-None) from spec or matrix_path."""
    if "spec" in config and "matrix_path" in config:
        raise ConfigError("give either spec or matrix_path, not both")
    if "spec" in config:
        spec = spectral.SpectralSpec.from_dict(config["spec"])
        decomp = spectral.build_system(spec)
        return decomp.a, decomp
    if "matrix_path" in config:
        if need_spec:
            raise ConfigError("this command needs block structure: give a spec")
        try:
            entries = np.loadtxt(config["matrix_path"], delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load matrix file: {exc}")
        return as_matrix(entries), None
    raise ConfigError("config must supply a spec or a matrix_path")


def _reward(config) -> conc.LipschitzReward:
    doc = config.get("reward", {"kind": "coordinate", "index": 0})
    return conc.LipschitzReward.from_dict(doc)


# ---------------------------------------------------------------------------
# command runners: each returns an ExperimentReport
# ---------------------------------------------------------------------------

def _run_hitting_time(config) -> ExperimentReport:
    seed = config["seed"]
    rows = []
    if "lambda" in config:
        lam = float(config["lambda"])
        n_min = int(config.get("n_min", 2))
        n_max = int(config.get("n_max", 30))
        if n_min < 1 or n_max < n_min:
            raise ConfigError("need 1 <= n_min <= n_max")
        for n in range(n_min, n_max + 1):
            spec = spectral.SpectralSpec(blocks=((lam, n),), similarity="identity", seed=seed)
            decomp = spectral.build_system(spec)
            report = spectral.first_contractive_hitting_time(
                decomp.a, k_max=config.get("k_max"), decomposition=decomp
            )
            rows.append(_hitting_row(n, report))
        echo = {"lambda": lam, "n_min": n_min, "n_max": n_max}
    else:
        a, decomp = _resolve_system(config)
        report = spectral.first_contractive_hitting_time(
            a, k_max=config.get("k_max"), decomposition=decomp
        )
        rows.append(_hitting_row(a.shape[0], report))
        echo = {"spec": config.get("spec"), "matrix_path": config.get("matrix_path")}
    return ExperimentReport(
        name="hitting-time",
        columns=["n", "k_hat", "bound_selfref", "bound_worstcase"],
        rows=rows,
        config=echo,
        seed=seed,
        trials=1,
    )


def _hitting_row(n: int, report: spectral.HittingTimeReport) -> dict:
    bound_one = max(report.block_bounds) if report.block_bounds else None
    return {
        "n": n,
        "k_hat": report.k_hat,
        "bound_selfref": bound_one,
        "bound_worstcase": report.worst_case_bound,
        "contraction_norm": report.contraction_norm,
    }


def _run_mixing(config) -> ExperimentReport:
    a, decomp = _resolve_system(config)
    k_hat = config.get("k_hat")
    if k_hat is None:
        k_hat = spectral.first_contractive_hitting_time(a, decomposition=decomp).k_hat
    n = a.shape[0]
    x0_cfg = config.get("x0", "e1")
    if x0_cfg == "e1":
        x0 = np.zeros(n)
        x0[0] = 1.0
    elif x0_cfg == "zero":
        x0 = np.zeros(n)
    elif isinstance(x0_cfg, list):
        x0 = np.asarray(x0_cfg, dtype=float)
        if x0.shape != (n,):
            raise ConfigError(f"x0 must have length {n}")
    else:
        raise ConfigError("x0 must be 'e1', 'zero', or a list of floats")
    report = conc.mixing_bound_check(a, int(k_hat), x0, int(config.get("m_max", 10)))
    report.seed = config["seed"]
    return report


def _run_concentration(config) -> ExperimentReport:
    a, decomp = _resolve_system(config)
    spacing = config.get("spacing", 1)
    if spacing == "k-hat":
        spacing = spectral.first_contractive_hitting_time(a, decomposition=decomp).k_hat
    return conc.ergodic_average_experiment(
        a,
        _reward(config),
        n_samples=int(config.get("n_samples", 100)),
        spacing=int(spacing),
        trials=int(config.get("trials", 10**4)),
        seed=config["seed"],
        epsilons=config.get("epsilons"),
        workers=int(config["workers"]),
    )


def _run_correlation(config) -> ExperimentReport:
    a, _ = _resolve_system(config)
    return conc.correlation_decay_experiment(
        a,
        _reward(config),
        gap_max=int(config.get("gap_max", 10)),
        trials=int(config.get("trials", 10**4)),
        seed=config["seed"],
        spacing=int(config.get("spacing", 1)),
        workers=int(config["workers"]),
    )


def _run_projection(config) -> ExperimentReport:
    _, decomp = _resolve_system(config, need_spec=True)
    return conc.projection_ratio_experiment(
        decomp,
        block_index=int(config.get("block_index", 0)),
        trials=int(config.get("trials", 10**4)),
        seed=config["seed"],
        delta=float(config.get("delta", 0.2)),
        n_steps=int(config.get("n_steps", 20)),
    )


def _run_ols(config) -> ExperimentReport:
    from .rng import derive_seed
    from .simulate import simulate_trajectory

    a, _ = _resolve_system(config)
    n_steps = int(config.get("n_steps", 200))
    trials = int(config.get("trials", 100))
    seed = config["seed"]
    rows = []
    for trial in range(trials):
        traj = simulate_trajectory(a, np.zeros(a.shape[0]), n_steps, derive_seed(seed, 1, trial))
        problem = sysid.ols_problem_from_trajectory(traj, true_a=a)
        rep = sysid.ols_error_report(problem)
        rows.append({"trial": trial, **rep.to_dict()})
    errors = [r["error_opnorm"] for r in rows]
    return ExperimentReport(
        name="ols",
        columns=[
            "trial",
            "error_opnorm",
            "error_upper_bound",
            "sigma1_xminus",
            "sigman_xminus",
            "kappa_xminus",
            "sigma1_noise",
        ],
        rows=rows,
        config={"n_steps": n_steps, "trials": trials},
        seed=seed,
        trials=trials,
        extras={"median_error": float(np.median(errors))},
    )


def _run_fig2(config) -> ExperimentReport:
    return sysid.ols_case_study(
        trials_per_mode=int(config.get("trials_per_mode", config.get("trials", 50))),
        n_grid=config.get("n_grid", [50, 75, 100]),
        seed=config["seed"],
        lambda1=float(config.get("lambda1", sysid.CASE_STUDY_BLOCKS[0][0])),
        workers=int(config["workers"]),
    )


def _run_sv_concentration(config) -> ExperimentReport:
    a, _ = _resolve_system(config)
    report = sysid.singular_value_concentration_experiment(
        a,
        n_steps=int(config.get("n_steps", 50)),
        trials=int(config.get("trials", 2000)),
        which_sv=config.get("which_sv", 1),
        seed=config["seed"],
        epsilons=config.get("epsilons"),
        workers=int(config["workers"]),
    )
    if "n_steps_list" in config:
        spread = sysid.sv_spread_vs_length(
            a,
            config["n_steps_list"],
            trials=int(config.get("trials", 2000)),
            which_sv=config.get("which_sv", 1),
            seed=config["seed"],
            workers=int(config["workers"]),
        )
        report.extras["spread_vs_length"] = spread.sorted_rows()
    return report


_RUNNERS = {
    "hitting-time": _run_hitting_time,
    "mixing": _run_mixing,
    "concentration": _run_concentration,
    "correlation": _run_correlation,
    "projection": _run_projection,
    "ols": _run_ols,
    "fig2": _run_fig2,
    "sv-concentration": _run_sv_concentration,
}


def _write_outputs(command: str, config: dict, report: ExperimentReport) -> list[Path]:
    out_dir = Path(config["out_dir"])
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}")
    regime = f"_{report.regime}" if report.regime else ""
    base = f"{command}{regime}_seed{config['seed']}"
    json_path = out_dir / f"{base}.json"
    csv_path = out_dir / f"{base}.csv"
    plot_path = out_dir / f"{base}_plot.csv"
    report.save_json(json_path)
    report.save_csv(csv_path)
    if command == "fig2":
        _write_fig2_plot(report, plot_path)
    else:
        report.save_csv(plot_path, columns=_PLOT_COLUMNS[command])
    return [json_path, csv_path, plot_path]


def _write_fig2_plot(report: ExperimentReport, path: Path) -> None:
    """Median error per (mode, N): the four-curve summary."""
    groups: dict[tuple, list[float]] = {}
    for row in report.rows:
        groups.setdefault((row["mode"], row["N"]), []).append(row["error_opnorm"])
    with open(path, "w", newline="") as fh:
        fh.write("mode,N,median_error\n")
        for (mode, n_steps), errs in sorted(groups.items()):
            fh.write(f"{mode},{n_steps},{repr(float(np.median(errs)))}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgmix",
        description="Mixing, concentration, and identification experiments "
        "for linear Gaussian systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="seed (mandatory here or in config)")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--out", help="output directory (default lgmix-out)")
        p.add_argument("--workers", type=int, help="parallel worker cap (default 1)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        report = _RUNNERS[args.command](config)
        report.seed = config["seed"]
        paths = _write_outputs(args.command, config, report)
    except (ConfigError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LgmixError as exc:
        print(f"numerical contract error: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

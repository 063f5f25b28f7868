#!/usr/bin/env python3
"""Desk-scale concentration experiments: ergodic-average tails on the scalar
and 2x2 reference systems, scalar correlation decay, and the Gaussian
projection geometry (typical ratio, tail frequencies, explosive-block
complement collapse)."""

import argparse
from pathlib import Path

import numpy as np

from lgmix import (
    LipschitzReward,
    SpectralSpec,
    build_system,
    correlation_decay_experiment,
    ergodic_average_experiment,
    projection_ratio_experiment,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="lgmix-out")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--trials", type=int, default=10**4)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    reward = LipschitzReward.coordinate(0)
    scalar = np.array([[0.5]])
    two = build_system(SpectralSpec(blocks=((0.9, 2),), similarity="identity", seed=1))

    runs = {
        "ergodic_scalar": lambda: ergodic_average_experiment(
            scalar, reward, 100, 1, args.trials, args.seed, workers=args.workers
        ),
        "ergodic_2x2_subsampled": lambda: ergodic_average_experiment(
            two.a, reward, 100, 35, args.trials, args.seed + 1, workers=args.workers
        ),
        "correlation_scalar": lambda: correlation_decay_experiment(
            scalar, reward, 10, args.trials, args.seed + 2, workers=args.workers
        ),
        "projection_100": lambda: projection_ratio_experiment(
            build_system(
                SpectralSpec(blocks=((0.9, 25), (0.5, 75)), similarity="random-orthogonal", seed=11)
            ),
            0,
            args.trials,
            args.seed + 3,
        ),
        "projection_case_study": lambda: projection_ratio_experiment(
            build_system(
                SpectralSpec(blocks=((1.5, 47), (-0.5, 3)), similarity="random-orthogonal", seed=7)
            ),
            0,
            args.trials,
            args.seed + 4,
            n_steps=20,
        ),
    }
    for name, run in runs.items():
        report = run()
        report.save_csv(out / f"{name}.csv")
        report.save_json(out / f"{name}.json")
        print(f"{name}: wrote {out / name}.csv")


if __name__ == "__main__":
    main()

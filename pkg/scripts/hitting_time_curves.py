#!/usr/bin/env python3
"""Hitting-time curves for growing Jordan blocks.

Three cases per dimension n: a single n-block at 0.86, a single n-block at
0.9, and an (n-1)-block at 0.9 paired with a size-1 block at 0.9 (the last
two coincide at n-1, showing the size-1 block is free). Emits one CSV row
per (case, n) with the exact hitting time and both closed-form bounds.
"""

import argparse
from pathlib import Path

from lgmix import (
    SpectralSpec,
    block_hitting_time_bound,
    build_system,
    first_contractive_hitting_time,
    worst_block_hitting_time,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="lgmix-out", help="output directory")
    ap.add_argument("--n-max", type=int, default=30)
    args = ap.parse_args()

    cases = {
        "case1-0.86": lambda n: ((0.86, n),),
        "case2-0.90": lambda n: ((0.9, n),),
        "case3-0.90-split": lambda n: ((0.9, n - 1), (0.9, 1)) if n >= 3 else None,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "hitting_time_curves.csv"
    with open(path, "w") as fh:
        fh.write("case,n,k_hat,bound_selfref,bound_worstcase\n")
        for name, blocks_for in cases.items():
            for n in range(2, args.n_max + 1):
                blocks = blocks_for(n)
                if blocks is None:
                    continue
                decomp = build_system(
                    SpectralSpec(blocks=blocks, similarity="identity", seed=0)
                )
                k_hat = first_contractive_hitting_time(decomp.a).k_hat
                selfref = max(block_hitting_time_bound(l, b) for l, b in blocks)
                worst = worst_block_hitting_time(blocks)
                fh.write(f"{name},{n},{k_hat},{selfref},{worst}\n")
    print(path)


if __name__ == "__main__":
    main()

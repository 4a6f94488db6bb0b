"""Empirical local-search / exact cost ratios across instance sizes."""

import argparse
import time

import numpy as np

from negsel.optselect import solve_exact, solve_local_search
from negsel.verify import random_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=200, help="per (M, weights) cell")
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 10, 14, 18])
    ap.add_argument("--restarts", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'M':>3} {'weights':>9} {'mean':>8} {'p99':>8} {'worst':>8} {'optimal':>8} {'secs':>6}")
    for m in args.sizes:
        for weights in ("uniform", "exp-mean"):
            t0 = time.perf_counter()
            ratios = []
            for t in range(args.instances):
                s = args.seed * 1_000_003 + m * 10_007 + t
                inst = random_instance(s, weights, max_m=m)
                exact = solve_exact(inst).objective_value
                local = solve_local_search(inst, seed=s, restarts=args.restarts).objective_value
                ratios.append(local / exact if exact > 0 else 1.0)
            r = np.array(ratios)
            print(f"{m:>3} {weights:>9} {r.mean():8.4f} {np.quantile(r, 0.99):8.4f} {r.max():8.4f} "
                  f"{np.mean(r <= 1 + 1e-12):8.3f} {time.perf_counter() - t0:6.1f}")


if __name__ == "__main__":
    main()

"""Train the toy softmax policy under each selector and compare outcomes."""

import argparse

from negsel.simulate import SimConfig, run_simulation, standard_instance

METHODS = ("bottomk", "coreset", "optselect-exact", "optselect-local")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--learning-rate", type=float, default=0.1)
    ap.add_argument("--reselect-every", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    pool = standard_instance(n=args.n, seed=args.seed)
    print(f"{'method':>16} {'loss0':>8} {'lossT':>8} {'E[r]0':>7} {'E[r]T':>7} {'neg0':>7} {'negT':>7}")
    for method in METHODS:
        cfg = SimConfig(method=method, k=args.k, learning_rate=args.learning_rate, steps=args.steps,
                        reselect_every=args.reselect_every, seed=args.seed)
        traj = run_simulation(pool, cfg)
        a, b = traj[0], traj[-1]
        print(f"{method:>16} {a.loss:8.4f} {b.loss:8.4f} {a.expected_reward:7.4f} {b.expected_reward:7.4f} "
              f"{a.negative_mass:7.4f} {b.negative_mass:7.4f}")


if __name__ == "__main__":
    main()

"""Write clustered synthetic candidate pools as JSONL for the CLI."""

import argparse
import json

import numpy as np


def make_pool(rng, prompt_id, n, dim, clusters):
    centers = rng.normal(size=(clusters, dim)) * 3.0
    labels = rng.integers(0, clusters, size=n)
    emb = centers[labels] + rng.normal(scale=0.3, size=(n, dim))
    # each cluster gets a base quality; members scatter around it
    base = rng.uniform(size=clusters)
    rewards = np.clip(base[labels] + rng.normal(scale=0.05, size=n), 0.0, 1.0)
    logits = rng.normal(size=n)
    logp = logits - np.log(np.exp(logits).sum())
    return {
        "prompt_id": prompt_id,
        "responses": [
            {"id": f"{prompt_id}-{i}", "reward": float(rewards[i]), "embedding": emb[i].tolist(),
             "logprob": float(logp[i])}
            for i in range(n)
        ],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pools", type=int, default=10)
    ap.add_argument("--n", type=int, default=16, help="candidates per pool")
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--clusters", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", default="pools.jsonl")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    with open(args.output, "w", encoding="utf-8") as f:
        for p in range(args.pools):
            f.write(json.dumps(make_pool(rng, f"prompt-{p}", args.n, args.dim, args.clusters)) + "\n")
    print(f"wrote {args.pools} pools to {args.output}")


if __name__ == "__main__":
    main()

"""Command line entry point: ``negsel {select,cost,refa,simulate,verify}``.

Exit codes: 0 success, 1 validation failure, 2 property-suite failure.
A flat TOML file passed with ``--config`` supplies defaults; explicit flags
win over it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import lipschitz, pipeline, verify
from .optselect import coverage_cost, make_instance
from .pool import Method, top_reward_index
from .refa import RefaConfig, log_softmax, refa_loss, refa_scores
from .simulate import SimConfig, SimulationDiverged, run_simulation, standard_instance
from .weights import compute_weights

EXIT_OK, EXIT_INVALID, EXIT_SUITE = 0, 1, 2

log = logging.getLogger("negsel")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="flat TOML file of option defaults")
    p.add_argument("--input", type=Path, required=False, help="pools, one JSON record per line")
    p.add_argument("--output", type=Path, help="output JSONL (default: stdout)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized steps (default: 0)")
    p.add_argument("--strict", action="store_true", help="abort on the first invalid record or failed pool")
    p.add_argument("--no-normalize-distances", dest="normalize_distances", action="store_false",
                   help="keep raw L2 distances instead of scaling the max to 1")


def _weights_flag(p):
    p.add_argument("--weight-scheme", choices=["exp-mean", "max-gap"], default="exp-mean",
                   help="suppression weights (default: exp-mean)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="negsel", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="choose one positive and K negatives per pool")
    _common(p)
    _weights_flag(p)
    p.add_argument("--method", choices=["bottomk", "coreset", "optselect"], default="optselect")
    p.add_argument("--mode", choices=["exact", "local"], default="local", help="optselect solver (default: local)")
    p.add_argument("--k", type=int, default=4, help="number of negatives (default: 4)")
    p.add_argument("--restarts", type=int, default=1, help="local-search restarts (default: 1)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${pipeline.WORKERS_ENV} or CPU count)")

    p = sub.add_parser("cost", help="coverage cost (and Lipschitz reward) of existing selections")
    _common(p)
    _weights_flag(p)
    p.add_argument("--selection", type=Path, required=False, help="preference records from `select`")
    p.add_argument("--lipschitz", type=float, default=None, help="also report feasibility and saturating reward")

    p = sub.add_parser("refa", help="contrastive loss of existing selections")
    _common(p)
    p.add_argument("--selection", type=Path, required=False)
    p.add_argument("--alpha", type=float, default=1.0, help="reward-deviation scale (default: 1.0)")
    p.add_argument("--beta", type=float, default=1.0, help="inverse temperature on scores (default: 1.0)")

    p = sub.add_parser("simulate", help="train a toy softmax policy on one pool")
    _common(p)
    p.add_argument("--prompt-id", help="pool to use from --input (default: first)")
    p.add_argument("--method", choices=[m.value for m in Method], default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)

    p = sub.add_parser("verify", help="run the seeded property suite")
    p.add_argument("--config", type=Path)
    p.add_argument("--check", choices=list(verify.CHECKS) + ["all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", action="store_true",
                   help="corrupt local search with one worsening swap (harness self-test)")
    p.add_argument("--output", type=Path)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv):
    """Re-parse with TOML values as defaults so explicit flags still win."""
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path is None:
        return args, {}
    with open(cfg_path, "rb") as f:
        cfg = tomllib.load(f)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest for a in sub._actions}
    known = {k.replace("-", "_"): v for k, v in cfg.items() if k.replace("-", "_") in dests}
    for key in ("input", "output", "selection"):
        if key in known and known[key] is not None:
            known[key] = Path(known[key])
    sub.set_defaults(**known)
    extra = {k: v for k, v in cfg.items() if k.replace("-", "_") not in dests}
    return parser.parse_args(argv), extra


def _emit(lines, output):
    text = "".join(pipeline.dumps(r) + "\n" for r in lines)
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _load(args):
    if args.input is None:
        raise pipeline.IngestError("--input is required")
    res = pipeline.ingest(args.input, strict=args.strict, normalize_distances=args.normalize_distances)
    for e in res.errors:
        print(f"line {e.line}: {e.message}", file=sys.stderr)
    return res


def cmd_select(args) -> int:
    res = _load(args)
    method = args.method
    if method == "optselect":
        method = "optselect-exact" if args.mode == "exact" else "optselect-local"
    params = {"k": args.k, "seed": args.seed, "weight_scheme": args.weight_scheme}
    if method.startswith("optselect"):
        params["restarts"] = args.restarts
    records, failures = pipeline.select_batch(res.pools, method, params, workers=args.workers)
    _emit([r for r in records if r is not None], args.output)
    for f in failures:
        print(json.dumps(f), file=sys.stderr)
    if failures and args.strict:
        return EXIT_INVALID
    return EXIT_OK if records and any(r is not None for r in records) else EXIT_INVALID


def _selections(args, pools):
    if args.selection is None:
        raise pipeline.IngestError("--selection is required")
    by_id = {p.prompt_id: p for p in pools}
    out = []
    for rec in pipeline.read_jsonl(args.selection):
        pool = by_id.get(rec.get("prompt_id"))
        if pool is None:
            raise pipeline.IngestError(f"selection for unknown prompt {rec.get('prompt_id')!r}")
        pos, neg = pipeline.selection_indices(pool, rec)
        out.append((pool, pos, neg))
    return out


def cmd_cost(args) -> int:
    res = _load(args)
    rows = []
    for pool, pos, neg in _selections(args, res.pools):
        reduced = [i for i in range(pool.n) if i != pos]
        w = compute_weights(pool.rewards[reduced], args.weight_scheme).values
        inst = make_instance(pool, len(neg), w, reduced)
        row = {"prompt_id": pool.prompt_id, "weight_scheme": args.weight_scheme,
               "coverage_cost": coverage_cost(inst, neg)}
        if args.lipschitz is not None:
            l = args.lipschitz
            row["lipschitz"] = l
            if pos != top_reward_index(pool):
                row["feasible"] = None
                row["note"] = "positive is not the top-reward candidate"
            else:
                row["feasible"] = lipschitz.feasibility_check(pool, neg, l)
                row["gap_cost"] = lipschitz.gap_cost(pool, neg)
                row["saturating_reward"] = (
                    lipschitz.saturating_reward(pool, neg, l) if row["feasible"] else None
                )
        rows.append(row)
    _emit(rows, args.output)
    return EXIT_OK


def cmd_refa(args) -> int:
    res = _load(args)
    cfg = RefaConfig(args.alpha, args.beta)
    rows = []
    for pool, pos, neg in _selections(args, res.pools):
        lp = pool.logprobs
        # without generation logprobs, score under a uniform policy
        lp = log_softmax(np.zeros(pool.n)) if lp is None else lp
        subset = [pos] + neg
        scores = refa_scores(lp, pool.rewards, subset, cfg)
        loss = refa_loss(scores, [0], list(range(1, len(subset))))
        rows.append({"prompt_id": pool.prompt_id, "loss": loss, "alpha": cfg.alpha, "beta": cfg.inverse_temperature})
    _emit(rows, args.output)
    return EXIT_OK


def cmd_simulate(args, extra) -> int:
    settings = dict(extra)
    for key in ("method", "k", "steps", "learning_rate"):
        val = getattr(args, key)
        if val is not None:
            settings[key] = val
    settings.setdefault("seed", args.seed)
    pool_seed = settings.pop("pool_seed", 0)
    config = SimConfig.from_dict(settings)
    if args.input is not None:
        pools = _load(args).pools
        if args.prompt_id is not None:
            pools = [p for p in pools if p.prompt_id == args.prompt_id]
            if not pools:
                raise pipeline.IngestError(f"no pool with prompt_id {args.prompt_id!r}")
        pool = pools[0]
    else:
        pool = standard_instance(seed=pool_seed)
    traj = run_simulation(pool, config)
    _emit([r.to_dict() for r in traj], args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.CHECKS if args.check == "all" else (args.check,)
    reports = verify.verify_suite(checks, seed=args.seed, inject_fault=args.inject_fault)
    doc = {"seed": args.seed, "passed": all(r.passed for r in reports),
           "checks": [r.to_dict() for r in reports]}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.instances} instances, {r.seconds:.1f}s)",
              file=sys.stderr)
    return EXIT_OK if doc["passed"] else EXIT_SUITE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = _apply_config(parser, argv)
    except (OSError, tomllib.TOMLDecodeError) as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "select":
            return cmd_select(args)
        if args.command == "cost":
            return cmd_cost(args)
        if args.command == "refa":
            return cmd_refa(args)
        if args.command == "simulate":
            return cmd_simulate(args, extra)
        return cmd_verify(args)
    except (pipeline.IngestError, ValueError, SimulationDiverged) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Line-delimited JSON ingestion, preference export and batch selection.

Input lines hold one pool each::

    {"prompt_id": "p1", "responses": [{"id": "a", "reward": 0.3,
      "embedding": [0.1, 0.2], "logprob": -1.2, "text": "..."}, ...]}

Output lines hold one selection each::

    {"prompt_id": "p1", "positive_id": "a", "negative_ids": ["b", "c"],
     "method": "bottomk", "objective_value": null, "seed": 0}
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .pool import Candidate, CandidatePool, PoolError, build_pool, ingest_rewards
from .simulate import select

log = logging.getLogger(__name__)

WORKERS_ENV = "NEGSEL_WORKERS"


class IngestError(ValueError):
    pass


@dataclass
class LineError:
    line: int
    message: str
    prompt_id: Optional[str] = None


@dataclass
class IngestResult:
    pools: list
    errors: list = field(default_factory=list)


def parse_record(obj: dict, normalize_distances: bool = True) -> CandidatePool:
    if not isinstance(obj, dict):
        raise PoolError("record is not a JSON object")
    prompt_id = obj.get("prompt_id")
    if not isinstance(prompt_id, str):
        raise PoolError("missing or non-string prompt_id")
    responses = obj.get("responses")
    if not isinstance(responses, list) or len(responses) < 2:
        raise PoolError("responses must be a list of at least 2 entries")
    for i, r in enumerate(responses):
        if not isinstance(r, dict):
            raise PoolError(f"response {i} is not an object")
        for key in ("id", "reward", "embedding"):
            if key not in r:
                raise PoolError(f"response {i} lacks {key!r}")
        if not isinstance(r["embedding"], list) or not r["embedding"]:
            raise PoolError(f"response {r['id']!r} has an empty or invalid embedding", str(r["id"]))
    try:
        rewards = ingest_rewards([float(r["reward"]) for r in responses])
    except (TypeError, ValueError) as e:
        raise PoolError(f"bad reward value: {e}") from None
    if not np.all(np.isfinite(rewards)):
        raise PoolError("rewards must be finite")
    cands = [
        Candidate(
            id=str(r["id"]),
            reward=float(rw),
            embedding=np.asarray(r["embedding"], dtype=float),
            logprob=None if r.get("logprob") is None else float(r["logprob"]),
            text=r.get("text"),
        )
        for r, rw in zip(responses, rewards)
    ]
    ids = [c.id for c in cands]
    if len(set(ids)) != len(ids):
        raise PoolError("response ids must be unique within a record")
    return build_pool(cands, normalize_distances=normalize_distances, prompt_id=prompt_id)


def ingest(path, strict: bool = False, normalize_distances: bool = True) -> IngestResult:
    """Read pools from a JSONL file.

    Malformed lines are collected with their line numbers. In strict mode the
    first bad line raises; otherwise it is skipped. A file with no valid
    record is always an error.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise IngestError(f"cannot read {path}: {e}") from None
    pools, errors = [], []
    for ln, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            pools.append(parse_record(json.loads(line), normalize_distances))
        except (json.JSONDecodeError, PoolError) as e:
            err = LineError(ln, str(e))
            if strict:
                raise IngestError(f"{path}:{ln}: {e}") from None
            log.warning("%s:%d: skipped: %s", path, ln, e)
            errors.append(err)
    if not pools:
        raise IngestError(f"{path}: no valid records")
    return IngestResult(pools, errors)


def pool_to_record(pool: CandidatePool) -> dict:
    responses = []
    for c in pool.candidates:
        r = {"id": c.id, "reward": float(c.reward), "embedding": [float(x) for x in c.embedding]}
        if c.logprob is not None:
            r["logprob"] = float(c.logprob)
        if c.text is not None:
            r["text"] = c.text
        responses.append(r)
    return {"prompt_id": pool.prompt_id, "responses": responses}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def export_pools(pools: Iterable[CandidatePool], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in pools:
            f.write(dumps(pool_to_record(p)) + "\n")


def preference_record(pool: CandidatePool, sel) -> dict:
    ids = pool.ids
    return {
        "prompt_id": pool.prompt_id,
        "positive_id": ids[sel.positive_index],
        "negative_ids": [ids[j] for j in sel.negative_indices],
        "method": sel.method.value,
        "objective_value": sel.objective_value,
        "seed": sel.seed,
    }


def _select_one(args):
    pool, method, params = args
    try:
        sel = select(pool, method, **params)
        return preference_record(pool, sel), None
    except Exception as e:  # per-pool failures are reported, not raised
        return None, {"prompt_id": pool.prompt_id, "error": type(e).__name__, "message": str(e)}


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def select_batch(pools, method, params: dict, workers: Optional[int] = None):
    """Run one selection per pool. Returns ``(records, failures)``.

    ``records`` follows input order and holds ``None`` for failed pools.
    """
    workers = default_workers() if workers is None else workers
    jobs = [(p, method, params) for p in pools]
    if workers <= 1 or len(jobs) <= 1:
        results = [_select_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_select_one, jobs))
    records = [r for r, _ in results]
    failures = [e for _, e in results if e is not None]
    return records, failures


def write_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(dumps(r) + "\n")


def read_jsonl(path) -> list:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def selection_indices(pool: CandidatePool, record: dict):
    """Map a preference record's ids back onto pool indices."""
    pos = {cid: i for i, cid in enumerate(pool.ids)}
    try:
        return pos[record["positive_id"]], [pos[c] for c in record["negative_ids"]]
    except KeyError as e:
        raise ValueError(f"{pool.prompt_id}: unknown response id {e.args[0]!r}") from None

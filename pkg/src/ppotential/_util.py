"""Small shared helpers: thread cap, ordered parallel map, canonical JSON."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "PPOTENTIAL_THREADS"


def thread_cap() -> int:
    """Parallelism cap from the PPOTENTIAL_THREADS env var; default 1."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_indexed(tasks, threads: int | None = None) -> list:
    """Run zero-argument callables, returning results in input order.

    With threads > 1 the tasks run on a pool (the solver kernels release the
    GIL); results are still collected by index so output never depends on
    scheduling.
    """
    tasks = list(tasks)
    cap = thread_cap() if threads is None else max(1, int(threads))
    if cap == 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace, full float repr."""
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))

"""Deterministic fan-out of independent slice computations."""

import multiprocessing as mp
import os

_CONTEXT = {}


def default_jobs():
    env = os.environ.get("KOSZUL_LAB_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError("KOSZUL_LAB_JOBS must be an integer, got %r" % env)
    return 1


def _call(args):
    key, item = args
    fn, ctx = _CONTEXT[key]
    return fn(ctx, item)


def pmap(fn, ctx, items, jobs=None):
    """[fn(ctx, item) for item in items], optionally over forked workers.

    ``ctx`` is handed to the workers through fork rather than pickling, so
    it may hold lazily populated caches.  Output order follows ``items``.
    """
    items = list(items)
    if jobs is None:
        jobs = default_jobs()
    if jobs <= 1 or len(items) < 2 or "fork" not in mp.get_all_start_methods():
        return [fn(ctx, item) for item in items]
    key = id(ctx), id(fn)
    _CONTEXT[key] = (fn, ctx)
    try:
        with mp.get_context("fork").Pool(min(jobs, len(items))) as pool:
            chunk = max(1, len(items) // (4 * jobs))
            return pool.map(_call, [(key, it) for it in items], chunksize=chunk)
    finally:
        _CONTEXT.pop(key, None)

from contextlib import contextmanager
from concurrent.futures import ProcessPoolExecutor
import functools
import hashlib
import json
import os

import numpy as np

import logging
logger = logging.getLogger(__name__)


def memoize(obj):
    cache = obj.cache = {}

    @functools.wraps(obj)
    def memoizer(*args, **kwargs):
        key = str(args) + str(kwargs)
        if key not in cache:
            cache[key] = obj(*args, **kwargs)
        return cache[key]
    return memoizer


def derive_rng(seed, unit=None):
    "Independent generator for work unit `unit` of a run seeded with `seed`."
    entropy = [int(seed)] if unit is None else [int(seed), int(unit)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def resolve_threads(threads):
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))


@contextmanager
def DummyPool(*args, **kwargs):

    def f():
        pass

    f.map = map
    yield f


def parallel_map(fn, tasks, threads=1):
    """Map `fn` over `tasks`, in-process when threads == 1.

    Results come back in task order, so the thread count never changes them.
    """
    tasks = list(tasks)
    threads = resolve_threads(threads)
    Pool = DummyPool if threads == 1 or len(tasks) <= 1 else ProcessPoolExecutor
    logger.debug("mapping %d tasks over %d workers", len(tasks), threads)
    with Pool(max_workers=min(threads, max(1, len(tasks)))) as p:
        return list(p.map(fn, tasks))


def split_counts(total, units):
    "Split `total` items into `units` near-equal integer counts."
    base, extra = divmod(int(total), int(units))
    return [base + (1 if k < extra else 0) for k in range(int(units))]


def to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError("cannot serialise %r" % type(obj))


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=to_jsonable)


def digest(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()

"""Bounded worker pool shared by the numerical modules.

Work items are independent and results are returned in input order, so
output never depends on the number of threads.
"""
from concurrent.futures import ThreadPoolExecutor

_THREADS = 1


def set_threads(n):
    global _THREADS
    _THREADS = max(1, int(n))


def get_threads():
    return _THREADS


def pmap(fn, items, threads=None):
    items = list(items)
    t = _THREADS if threads is None else max(1, int(threads))
    if t == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=t) as ex:
        return list(ex.map(fn, items))


def chunks(n, parts):
    parts = max(1, min(parts, n))
    bounds = [n * i // parts for i in range(parts + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(parts)]

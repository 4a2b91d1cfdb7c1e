"""Uniform grids and deterministic reductions over them.

Grid sums are split into fixed-size chunks whose boundaries depend only on
the number of points, never on the worker count; chunk partials are combined
with numpy's pairwise summation.  Results are therefore bit-identical for any
``threads`` setting.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import time

import numpy as np

CHUNK = 8192


@dataclass
class DosEstimate:
    """Result of one DOS evaluation.

    ``n_evals`` counts k-points at which the Hamiltonian (or band set) was
    evaluated; ``wall_time`` covers the method call only.
    """

    value: float
    n_evals: int
    wall_time: float
    method: str
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def ptr_grid(d, N, domain=None):
    """The ``N**d`` points ``lo + (hi - lo) * n / N``, ``0 <= n_j < N``.

    With the default domain this is ``n / N - 1/2``.  Points are returned in
    C order with the last coordinate varying fastest, shape ``(N**d, d)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lo, hi = _domain(d, domain)
    idx = np.indices((N,) * d).reshape(d, -1).T
    return lo + (hi - lo) * idx / N


def _domain(d, domain):
    if domain is None:
        return np.full(d, -0.5), np.full(d, 0.5)
    return np.asarray(domain[0], float), np.asarray(domain[1], float)


def _chunk_points(d, N, lo, hi, start, stop):
    flat = np.arange(start, stop)
    idx = np.stack(np.unravel_index(flat, (N,) * d), axis=-1)
    return lo + (hi - lo) * idx / N


def _run(tasks, fn, threads):
    if threads is None or threads <= 1 or len(tasks) == 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def grid_sum(fn, d, N, domain=None, threads=1, chunk=CHUNK):
    """``sum_k fn(k)`` over the uniform grid, reduced deterministically.

    ``fn`` maps a ``(m, d)`` array of points to ``m`` (real or complex) values.
    """
    lo, hi = _domain(d, domain)
    total = N**d
    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]

    def work(b):
        return np.sum(fn(_chunk_points(d, N, lo, hi, *b)))

    partials = np.array(_run(bounds, work, threads))
    return np.sum(partials)


def grid_map(fn, d, N, domain=None, threads=1, chunk=CHUNK):
    """Apply ``fn`` chunk-wise and return the list of chunk results in grid order."""
    lo, hi = _domain(d, domain)
    total = N**d
    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    return _run(bounds, lambda b: fn(_chunk_points(d, N, lo, hi, *b), b[0]), threads)

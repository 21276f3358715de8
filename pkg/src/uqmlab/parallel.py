"""Chunked, seed-keyed parallel sampling.

Work is cut into fixed-size chunks and chunk ``k`` draws from the substream
``SeedSequence(seed, spawn_key=(k,))``. Results depend only on the seed and
the chunk size, never on the number of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 25_000


def chunk_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_chunked(fn, seed, total, threads=1, chunk_size=CHUNK_SIZE):
    """Call ``fn(rng, m)`` on consecutive chunks covering `total` trials.

    Returns the list of per-chunk results in chunk order.
    """
    sizes = [min(chunk_size, total - start) for start in range(0, total, chunk_size)]
    jobs = [(k, m) for k, m in enumerate(sizes)]

    def work(job):
        k, m = job
        return fn(chunk_rng(seed, k), m)

    if threads is None or threads <= 1 or len(jobs) <= 1:
        return [work(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, jobs))


def sample_chunked(exp, w, seed, total, threads=1, chunk_size=CHUNK_SIZE):
    """Rejection-sample `total` outcomes of a continuous experiment chunk by chunk.

    Returns ``(points, densities, proposals)``.
    """
    def fn(rng, m):
        pts, dens, stats = exp.sample(w, m, rng, return_stats=True)
        return pts, dens, stats["proposed"]

    parts = run_chunked(fn, seed, total, threads, chunk_size)
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        sum(p[2] for p in parts),
    )

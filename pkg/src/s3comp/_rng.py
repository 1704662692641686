"""Seeded random streams.

All randomness is drawn from Philox (a counter-based 64-bit generator) keyed
by ``SeedSequence(seed, spawn_key=(stream_id,))``.  Each purpose owns a fixed
stream id so that, for example, changing the number of k-means restarts never
perturbs the dropout masks drawn for the same seed.
"""
import numpy as np

STREAMS = {
    "basis": 0,
    "points": 1,
    "masks": 2,
    "kmeans": 3,
    "montecarlo": 4,
}


def stream_rng(seed, stream):
    """Return a ``numpy.random.Generator`` for ``(seed, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(STREAMS[stream],))
    return np.random.Generator(np.random.Philox(ss))


def stream_int(seed, stream):
    """A 31-bit integer seed derived from ``(seed, stream)`` for libraries that want an int."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(STREAMS[stream],))
    return int(ss.generate_state(1, dtype=np.uint32)[0] >> 1)

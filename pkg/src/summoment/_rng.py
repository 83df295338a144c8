"""Seeded random streams.

Every generator in the package draws from ``numpy.random.Philox`` (a
counter-based 4x64 generator) keyed by ``(seed, stream)``.  Distinct stream
ids give statistically independent sequences, so Monte Carlo trials can run in
any order or on any worker and still reproduce bit-identically.  Normal
variates use numpy's ziggurat ``standard_normal``.
"""

import numpy as np

_MAX_KEY = 2**64


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    seed = int(seed)
    stream = int(stream)
    if not (0 <= seed < _MAX_KEY and 0 <= stream < _MAX_KEY):
        raise ValueError(f"seed and stream must be in [0, 2**64), got {seed}, {stream}")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def normals_per_stream(seed: int, streams, size: int) -> np.ndarray:
    """Stack ``size`` standard normals from each stream id, one row per stream."""
    streams = list(streams)
    out = np.empty((len(streams), size))
    for row, stream in enumerate(streams):
        out[row] = make_rng(seed, stream).standard_normal(size)
    return out

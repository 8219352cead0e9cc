"""Seeded, counter-derived random streams.

Every Monte Carlo loop in the package draws from a generator obtained via
``stream(seed, *path)``.  The path identifies the consumer (audit name,
chunk index, sample index, ...), so the sample-to-stream mapping is fixed
by construction and never depends on thread count or evaluation order.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _as_entropy(x) -> int:
    if isinstance(x, str):
        return int.from_bytes(hashlib.sha256(x.encode()).digest()[:8], "big")
    return int(x) & _MASK64


def stream(seed, *path) -> np.random.Generator:
    """Generator keyed by (seed, *path); path entries are ints or strings."""
    entropy = [_as_entropy(seed)] + [_as_entropy(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))

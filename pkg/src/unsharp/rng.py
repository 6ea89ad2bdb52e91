"""Seeded random streams.

All randomness goes through numpy's PCG64 bit generator seeded by a
``SeedSequence(entropy=seed, spawn_key=key)``.  A stream is a pure function
of ``(seed, key)``, so work split across threads or processes reproduces the
single-threaded result bit for bit.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the sub-task identified by ``key``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))

"""Seeded random-number streams.

All randomness in the package flows from one integer seed through named
sub-streams, so adding a new consumer of randomness never perturbs the
draws seen by existing ones.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Return a generator for the sub-stream `name` of the given seed.

    The same (seed, name) pair always yields the same draw sequence;
    distinct names yield statistically independent streams.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))

"""Deterministic RNG stream derivation.

Every random draw in a drop comes from a Generator derived from
(drop seed, subsystem, entity) via SeedSequence spawn keys, so results
never depend on event processing order or on drop-level parallelism.
"""
from __future__ import annotations

import numpy as np

# subsystem ids used as the first spawn-key component
PLACEMENT = 0
LARGE_SCALE = 1
FADING = 2
TRAFFIC = 3
MINSTREL = 4
DECODE = 5
BACKOFF = 6


def drop_seed(base_seed: int, drop_index: int) -> int:
    return int(base_seed) + int(drop_index)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...). Stable across platforms."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))

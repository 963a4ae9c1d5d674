"""
Deterministic random streams.

Every consumer of randomness owns an independent numpy Generator derived from
(seed, stream id, extra keys) with SeedSequence spawn keys, so results are pure
functions of the seed and never depend on call order across consumers.
"""
import zlib
from typing import List

import numpy as np

FIRE_STREAM = 0
SENSING_STREAM = 1
PLANNER_STREAM = 2
FILTER_STREAM = 3
INSTANCE_STREAM = 4


def derive_rng(seed: int, stream: int, *keys: int) -> np.random.Generator:
    """Generator for (seed, stream, *keys); identical arguments give identical draws."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),) + tuple(int(k) for k in keys))
    return np.random.default_rng(sequence)


def stable_key(name: str) -> int:
    """Process-independent integer key for a name (``hash`` is salted per process)."""
    return zlib.crc32(name.encode("utf-8"))


def spawn_seeds(base_seed: int, count: int) -> List[int]:
    """`count` independent 64-bit seeds derived from one base seed."""
    children = np.random.SeedSequence(int(base_seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]

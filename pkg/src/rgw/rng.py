"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose
128-bit key is built from ``(base_seed, purpose, index)``. Streams for
different indices are independent and can be created in any order or in
any process, so parallel fan-out is reproducible without coordination.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# purpose tags keep streams of different experiments apart
TRAJECTORY = 1
ENSEMBLE = 2
TREE = 3
COUPLING = 4
URN = 5
MANY_TO_ONE = 6
FLUCTUATION = 7


def stream(seed: int, index: int = 0, purpose: int = 0) -> np.random.Generator:
    if index < 0 or index >= 1 << 48:
        raise ValueError(f"stream index {index} out of range")
    key = np.array([int(seed) & MASK64, (purpose << 48) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))

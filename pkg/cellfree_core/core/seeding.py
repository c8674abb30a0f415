"""Counter-based seed derivation.

Every random stream of a run is keyed by ``(master_seed, throw, stream, *extra)``
so any throw, strategy or CPU can be regenerated on its own and in any order.
"""

from enum import IntEnum
from typing import Sequence

import numpy as np


class Stream(IntEnum):
    """Stream identifiers. Values are part of the reproducibility contract."""

    DEPLOYMENT = 1
    CLUSTERING = 2
    SHADOWING = 3
    PILOTS = 4
    DESIGN = 5
    FADING = 6


def derive_seed(master_seed: int, throw: int, stream: Stream, *extra: int) -> int:
    """Return a 63-bit integer seed for the given counter tuple."""
    entropy: Sequence[int] = [int(master_seed), int(throw), int(stream), *map(int, extra)]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


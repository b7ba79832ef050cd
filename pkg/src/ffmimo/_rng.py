"""Counter-based random substreams.

Every random draw in the package goes through :func:`substream` keyed by a
master seed plus integer counters (grid point, channel, batch ...), so results
do not depend on how the work is split across processes.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int | None, *keys: int) -> np.random.Generator:
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]))


def batch_sizes(trials: int, batch_size: int) -> list[int]:
    """Split ``trials`` into fixed-size batches (last one possibly short)."""
    full, rest = divmod(int(trials), int(batch_size))
    return [batch_size] * full + ([rest] if rest else [])

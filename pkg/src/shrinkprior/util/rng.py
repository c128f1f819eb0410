"""Reproducible random streams.

Every stream is a counter-based Philox generator keyed by
``SeedSequence(seed, spawn_key=path)``. The path names the consumer:

* ``(0, chain_id)``   one MCMC chain
* ``(1, grid_index)`` all replications of one risk-sweep grid point

so results never depend on how work is scheduled across threads.
"""
import numpy as np

from shrinkprior.util.errors import ValidationError

CHAIN_STREAM = 0
RISK_STREAM = 1


def stream(seed: int, *path: int) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.Philox(sequence))

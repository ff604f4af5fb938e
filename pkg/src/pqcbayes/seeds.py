"""Deterministic derivation of child seeds for nested random streams.

Every random consumer (shot sampling, per-seed experiment instances, SGLD
noise) draws from a seed derived from a master seed plus an integer path,
so results never depend on call or execution order.
"""

from __future__ import annotations

import numpy as np


def derive_seed(*path: int) -> int:
    """Map a tuple of integers to a 64-bit seed via SeedSequence hashing."""
    seq = np.random.SeedSequence([int(p) for p in path])
    return int(seq.generate_state(1, np.uint64)[0])


def iteration_rng(master_seed: int, iteration: int) -> np.random.Generator:
    """Counter-based generator for one training iteration.

    The iteration index occupies the high words of the Philox counter, so
    each iteration owns a disjoint block of the stream and component k of a
    vector draw is a fixed position in that block.
    """
    bit_gen = np.random.Philox(key=int(master_seed), counter=int(iteration) << 128)
    return np.random.Generator(bit_gen)

"""
Seed derivation for reproducible parallel work
"""

import numpy as np


def derive_seed(seed: int, *keys: int) -> int:
    """Derive an independent 64-bit seed from a base seed and integer keys"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32).view(np.uint64)[0])


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))

"""Seed derivation.

Every random stream is keyed by a path of integers under one master seed, so
adding restarts or cells never perturbs streams that already exist.
"""

import numpy as np

ALGORITHM_CODES = {"kernel_kmeans": 0, "som": 1, "gmm": 2}


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(restart),)))


def cell_seed(master_seed: int, algorithm: str, k: int, f: int) -> int:
    """Seed for one sweep cell, from (master seed, algorithm, k, f)."""
    ss = np.random.SeedSequence(
        int(master_seed), spawn_key=(ALGORITHM_CODES[algorithm], int(k), int(f))
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))

"""Deterministic seed derivation.

All randomness in a run flows from one root seed. Each consumer gets its own
child seed derived from the root plus a stable integer path, so adding or
reordering consumers never perturbs the others.
"""

import numpy as np

# Domain codes for child seeds. Fixed forever; append only.
DOMAIN_PARAMS = 1
DOMAIN_SHUFFLE = 2
DOMAIN_SYNTH = 3
DOMAIN_CONTROL_GRAPH = 4


def child_seed(root_seed: int, *path: int) -> int:
    """Derive a 64-bit child seed from a root seed and an integer path."""
    ss = np.random.SeedSequence((int(root_seed),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(root_seed: int, *path: int) -> np.random.Generator:
    """Generator seeded by the derived child seed."""
    return np.random.default_rng(child_seed(root_seed, *path))

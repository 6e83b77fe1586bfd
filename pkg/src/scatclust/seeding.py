"""Deterministic derivation of per-stage RNG seeds from one master seed."""

import numpy as np


def derive_seed(seed: int, salt: int) -> int:
    """Stable child seed for stage `salt` of a run seeded with `seed`."""
    return int(np.random.SeedSequence([int(seed), int(salt)]).generate_state(1)[0])

"""Deterministic seed derivation for per-item randomized steps.

Derived seeds make parallel and sequential runs agree: every randomized
sub-step draws from a seed that is a pure function of the global seed
and the item's index, never from shared stream state.
"""

from __future__ import annotations

import numpy as np


def derive_seed(*parts: int) -> int:
    """Mix integer parts into one stable 64-bit seed."""
    seq = np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts])
    state = seq.generate_state(2)
    return int(state[0]) << 32 | int(state[1])

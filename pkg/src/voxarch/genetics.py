"""Token-space breeding operators: uniform crossover and swap mutation.

Both act purely on integer token sequences; decoding and optional grid
clean-up happen downstream.
"""

from __future__ import annotations

import numpy as np

DEFAULT_SWAP_FRACTION = 0.25  # swaps = sequence length / 4


def crossover(a, b, seed: int = 0) -> np.ndarray:
    """Pick each position's token from one parent with probability 1/2."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"parent lengths differ: {a.shape} vs {b.shape}")
    take_a = np.random.default_rng(seed).random(a.shape[0]) < 0.5
    return np.where(take_a, a, b)


def mutate(tokens, n_swaps: int | None = None, seed: int = 0) -> np.ndarray:
    """Apply ``n_swaps`` successive swaps of two distinct random positions.

    Defaults to one quarter of the sequence length. The token multiset is
    preserved exactly.
    """
    out = np.asarray(tokens).copy()
    length = out.shape[0]
    if n_swaps is None:
        n_swaps = int(length * DEFAULT_SWAP_FRACTION)
    if n_swaps < 0:
        raise ValueError("n_swaps must be >= 0")
    if n_swaps > 0 and length < 2:
        raise ValueError("need at least two tokens to swap")
    rng = np.random.default_rng(seed)
    for _ in range(n_swaps):
        i, j = rng.choice(length, size=2, replace=False)
        out[i], out[j] = out[j], out[i]
    return out

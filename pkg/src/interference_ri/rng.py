"""Counter-based random streams.

Every stochastic quantity in the package is drawn from a Philox stream whose
key is derived from a user seed plus a fixed tag.  Because Philox is
counter-based, the value at stream position ``p`` depends only on the key and
``p``; a draw that occupies a known block of positions can therefore be
reproduced in isolation, in any order, by any worker.
"""

from __future__ import annotations

import numpy as np

# Stream tags.  Changing any of these changes every downstream result.
POSITIONS = 1
ASSIGNMENTS = 2
UNIFORMITY = 3
TRUE_ASSIGNMENT = 4
REFERENCE = 5

_RAW_PER_BLOCK = 4  # Philox4x64 emits four uint64 values per counter step


def check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return seed


def derive_seed(seed: int, *path: int) -> int:
    """Return a 128-bit key for the sub-stream ``path`` of ``seed``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(p) for p in path))
    lo, hi = ss.generate_state(2, dtype=np.uint64)
    return int(lo) | (int(hi) << 64)


def stream(key: int, position: int = 0) -> np.random.Generator:
    """A generator over the Philox stream ``key``, starting at raw position ``position``.

    ``Generator.random`` consumes exactly one raw 64-bit value per double, so
    a caller that reads ``k`` doubles per draw can jump straight to draw ``j``
    with ``position = j * k``.
    """
    bitgen = np.random.Philox(key=key)
    if position:
        blocks, rem = divmod(int(position), _RAW_PER_BLOCK)
        if blocks:
            bitgen.advance(blocks)
        if rem:
            bitgen.random_raw(rem)
    return np.random.Generator(bitgen)

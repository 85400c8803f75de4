"""Named random sub-streams derived from one 64-bit seed."""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Independent generator for component ``name`` (plus optional integer keys).

    Changing the seed of one component never perturbs another.
    """
    key = (zlib.crc32(name.encode()), *(int(e) for e in extra))
    return np.random.default_rng(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=key))

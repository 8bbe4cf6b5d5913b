"""Named deterministic substreams derived from one master seed.

Every random draw in the workbench flows from a single master seed through a
named substream (e.g. ``pool``, ``dialog/<target>``, ``sut/<target>``), so
runs replay bit-for-bit regardless of scheduling or parallelism.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import InputError


def _name_words(name: str) -> list[int]:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Generator for the substream `name`, independent of all other names."""
    if master_seed < 0:
        raise InputError("master seed must be a non-negative integer")
    seq = np.random.SeedSequence([int(master_seed), *_name_words(name)])
    return np.random.default_rng(seq)


def substream_seed(master_seed: int, name: str) -> int:
    """Stable integer seed for components that manage their own RNG."""
    if master_seed < 0:
        raise InputError("master seed must be a non-negative integer")
    digest = hashlib.sha256(f"{master_seed}/{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")

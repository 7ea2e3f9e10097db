"""
random_source.py
----------------
Deterministic stream derivation for seeded ensembles.

Every random draw in the library comes from a numpy Generator handed in by
the caller. Experiments obtain those generators from a RandomSource:

    source = RandomSource(20130501)
    rng = source.stream("ensemble/M1/N100", index=7)

The triple (master_seed, tag, index) is fed to numpy's SeedSequence, so the
same triple always replays the same values and distinct triples give
independent streams. The tag is hashed with xxhash (stable across processes,
unlike the builtin hash()).
"""

from __future__ import annotations

import numpy as np
import xxhash

from .errors import ContractViolation

_U64 = 1 << 64


class RandomSource:
    def __init__(self, master_seed: int):
        if not isinstance(master_seed, (int, np.integer)) or isinstance(master_seed, bool):
            raise ContractViolation(f"seed must be an integer, got {master_seed!r}")
        if not 0 <= int(master_seed) < _U64:
            raise ContractViolation(f"seed must fit in 64 unsigned bits, got {master_seed}")
        self.master_seed = int(master_seed)

    @staticmethod
    def tag_key(tag: str) -> int:
        return xxhash.xxh64_intdigest(tag.encode("utf-8"))

    def seed_sequence(self, tag: str, index: int = 0) -> np.random.SeedSequence:
        if index < 0:
            raise ContractViolation(f"stream index must be >= 0, got {index}")
        return np.random.SeedSequence([self.master_seed, self.tag_key(tag), int(index)])

    def stream(self, tag: str, index: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(tag, index)))

    def __repr__(self) -> str:
        return f"RandomSource(master_seed={self.master_seed})"

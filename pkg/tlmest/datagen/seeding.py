"""Counter-based seed fan-out: one master seed, independent keyed substreams."""

from __future__ import annotations

import numpy as np

# substream tags
COEFFICIENTS = 0
COVARIATES = 1
NOISE = 2
GOE = 3
RESPONSES = 4


def substream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the substream ``key`` of ``seed``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def replication_seed(master: int, rep: int) -> int:
    """Non-negative 63-bit seed of replication ``rep``; a pure function of (master, rep)."""
    words = np.random.SeedSequence(int(master), spawn_key=(int(rep),)).generate_state(
        2, dtype=np.uint32
    )
    return (int(words[0]) | (int(words[1]) << 32)) & 0x7FFF_FFFF_FFFF_FFFF

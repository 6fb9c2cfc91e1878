"""Reproducible random streams keyed by ``(seed, stream_index)``.

Streams are built on Philox, a counter-based generator, through
``SeedSequence`` spawn keys. Stream ``k`` of seed ``s`` is the same no matter
how many other streams exist or in what order they are consumed, which is what
makes parallel replicas bit-identical across worker counts.
"""

import numpy as np

DEFAULT_SEED = 20070426

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))

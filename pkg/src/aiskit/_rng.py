"""Seeded random streams.

Every stochastic component draws from ``derive_rng(seed, name)``. The stream
depends only on the root seed and the component name, so adding a new
component never shifts the draws of an existing one.
"""

import zlib

import numpy as np


def derive_rng(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64([int(seed) & 0xFFFFFFFFFFFFFFFF, key]))

"""Seeded, counter-based random streams.

Every random decision in the package is drawn from a Philox generator keyed
by ``(seed, *tags)``.  Two calls with the same key produce the same stream,
which is what makes solution files reproducible and lets coupled-sampling
tests share uniforms across different sampling rates.
"""

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_to_int(tag):
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _MASK64
    return zlib.crc32(str(tag).encode("utf-8"))


def stream(seed, *tags):
    """Return a ``numpy.random.Generator`` for the key ``(seed, *tags)``."""
    entropy = [int(seed) & _MASK64] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed, *tags):
    """A 63-bit child seed, for handing to code that takes a plain integer."""
    return int(stream(seed, "derive", *tags).integers(0, 2**63 - 1))

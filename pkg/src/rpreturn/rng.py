"""Counter-based random streams.

Each stream is a Philox generator keyed by ``(base_seed, *key)``, so any
trial or run can be reconstructed from its coordinates alone, independent
of execution order or worker count.
"""

import zlib

import numpy as np


def _word(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


def stream(base_seed, *key):
    """Return an independent generator for the coordinates ``key``.

    String parts are hashed with CRC-32 so that experiment tags can be used
    directly, e.g. ``stream(1, "signal", "periodic", 17)``.
    """
    seq = np.random.SeedSequence(int(base_seed), spawn_key=tuple(_word(p) for p in key))
    return np.random.Generator(np.random.Philox(seq))

"""Named random sub-streams derived from a single integer seed.

Every stochastic component draws from its own stream so that, e.g., the
weight generator can be reproduced without replaying the evolutionary run.
All streams are PCG64 generators seeded through ``numpy.random.SeedSequence``.
"""

import zlib

import numpy as np

STREAMS = {
    "init": 0,
    "selection": 1,
    "operators": 2,
    "weights": 3,
    "instances": 4,
}


def stream(seed, name, *extra):
    """Return the generator for sub-stream ``name`` of ``seed``.

    ``extra`` integers (or strings, hashed with CRC-32) further split the
    stream, e.g. per instance id or per repetition.
    """
    key = [STREAMS[name]]
    for e in extra:
        key.append(zlib.crc32(e.encode()) if isinstance(e, str) else int(e))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))

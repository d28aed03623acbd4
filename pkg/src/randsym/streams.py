"""Deterministic splittable random streams.

Every random draw in this package is keyed by a tuple of integers
``(seed, k1, k2, ...)`` fed to :class:`numpy.random.SeedSequence`.  Two
consequences:

* rerunning with the same seed reproduces every draw bit for bit, and
* work can be fanned out across any number of workers, as long as the
  work units are the keyed substreams themselves.

Long draw streams are split into fixed-size chunks; the value at index i
depends only on (seed, i // CHUNK, position inside the chunk), so chunked
parallel generation matches serial generation exactly.
"""

from __future__ import annotations

from typing import Iterator, Tuple

import numpy as np

CHUNK = 1024


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the integer key (seed, *key)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in key]]))


def chunk_bounds(count: int, chunk: int = CHUNK) -> Iterator[Tuple[int, int, int]]:
    """Yield (chunk_index, start, stop) covering range(count)."""
    i = 0
    start = 0
    while start < count:
        stop = min(start + chunk, count)
        yield i, start, stop
        i += 1
        start = stop

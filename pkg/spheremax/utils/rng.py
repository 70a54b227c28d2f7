"""Seedable counter-based random streams.

Every random draw in spheremax flows from one integer seed. Independent
substreams are addressed by integer keys (experiment slot, shard index, ...)
so a computation split over any number of workers reproduces bit for bit.
"""

import numpy as np

SHARD_SIZE = 1 << 16


def stream(seed, *keys):
    """Return a Philox-backed generator for the substream ``keys`` of ``seed``."""
    seed_seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seed_seq))


def shard_sizes(total, shard_size=SHARD_SIZE):
    """Split ``total`` draws into fixed-size shards (last one may be shorter)."""
    if total <= 0:
        return []
    full, rest = divmod(int(total), int(shard_size))
    sizes = [int(shard_size)] * full
    if rest:
        sizes.append(rest)
    return sizes

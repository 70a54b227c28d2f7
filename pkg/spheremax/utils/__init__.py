"""
Utility functions for spheremax: random streams, worker pool, grid file I/O.
"""

from .parallel import ordered_map, pairwise_sum, set_worker_limit
from .rng import stream

__all__ = ['ordered_map', 'pairwise_sum', 'set_worker_limit', 'stream']

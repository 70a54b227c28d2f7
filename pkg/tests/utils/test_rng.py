import numpy as np

from spheremax.utils.rng import SHARD_SIZE, shard_sizes, stream


def test_stream_is_reproducible():
    a = stream(7, 1, 2).standard_normal(5)
    b = stream(7, 1, 2).standard_normal(5)
    assert np.array_equal(a, b)


def test_substreams_differ():
    a = stream(7, 0).standard_normal(5)
    b = stream(7, 1).standard_normal(5)
    c = stream(8, 0).standard_normal(5)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_uses_philox():
    assert isinstance(stream(0).bit_generator, np.random.Philox)


def test_shard_sizes():
    assert shard_sizes(0) == []
    assert shard_sizes(10, 4) == [4, 4, 2]
    assert shard_sizes(8, 4) == [4, 4]
    assert sum(shard_sizes(3 * SHARD_SIZE + 5)) == 3 * SHARD_SIZE + 5

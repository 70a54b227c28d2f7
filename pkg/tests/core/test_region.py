from fractions import Fraction

import numpy as np
import pytest

from spheremax.core import region
from spheremax.core.region import ExponentPoint, RegionStatus, classify, classify_many
from spheremax.errors import DomainError


def test_delta_values():
    assert region.delta_n(8) == Fraction(1, 10)
    assert region.delta_n(20) == Fraction(5, 2)
    assert region.decay_rate(8) == region.delta_n(8)
    assert region.diagonal_piece_exponent(8) == Fraction(-1, 10)
    assert region.offdiagonal_piece_exponent(8) == 7


def test_delta_rejects_bad_dimension():
    with pytest.raises(DomainError):
        region.delta_n(0)


def test_threshold():
    assert region.threshold(1) == 1
    assert region.threshold(2) == Fraction(2, 3)


def test_rhombus_vertices_n8():
    p0, p1, p2, p3 = region.rhombus_vertices(8)
    assert p0.as_tuple() == (0, 0, 0)
    assert p1.as_tuple() == (1, 0, 1)
    assert p2.as_tuple() == (0, 1, 1)
    assert p3.as_tuple() == (Fraction(6, 11), Fraction(6, 11), Fraction(12, 11))


def test_rhombus_vertices_alternate():
    _, p1, p2, _ = region.rhombus_vertices(8, alternate=True)
    assert p1.inv_p1 == Fraction(29, 30)
    assert p2.inv_p2 == Fraction(29, 30)


def test_rhombus_needs_n8():
    with pytest.raises(DomainError):
        region.rhombus_vertices(7)


def test_diagonal_vertex_between_one_and_threshold():
    for n in (8, 12, 20):
        p3 = region.rhombus_vertices(n)[3]
        assert 1 < p3.inv_p < Fraction(2 * n - 1, n)
        assert region.diagonal_gap(n) > 0
        assert region.interpolation_threshold(n) == 1 / p3.inv_p1


def test_exponent_point_hoelder_relation():
    with pytest.raises(DomainError):
        ExponentPoint(Fraction(1, 2), Fraction(1, 4), Fraction(1))
    with pytest.raises(DomainError):
        ExponentPoint(Fraction(3, 2), Fraction(0))
    pt = ExponentPoint.from_exponents(2, float("inf"))
    assert pt.as_tuple() == (Fraction(1, 2), 0, Fraction(1, 2))


def test_classify_half_point():
    half = ExponentPoint(Fraction(1, 2), Fraction(1, 2))
    assert classify(1, half).status is RegionStatus.UNBOUNDED
    assert classify(2, half).status is RegionStatus.UNKNOWN
    assert classify(8, half).status is RegionStatus.BOUNDED_RHOMBUS


def test_classify_banach_and_unknown():
    assert classify(2, ExponentPoint(Fraction(1, 4), Fraction(1, 4))).status is RegionStatus.BOUNDED_BANACH
    assert classify(1, ExponentPoint(Fraction(1, 4), Fraction(1, 4))).status is RegionStatus.UNKNOWN
    assert classify(3, ExponentPoint(Fraction(4, 5), Fraction(4, 5))).status is RegionStatus.UNKNOWN


def test_classify_unbounded_edge():
    # exactly 1/p = (2n-1)/n
    assert classify(2, ExponentPoint(Fraction(3, 4), Fraction(3, 4))).status is RegionStatus.UNBOUNDED


def test_classify_is_symmetric():
    pt = ExponentPoint(Fraction(1, 3), Fraction(1, 7))
    for n in (1, 2, 8):
        assert classify(n, pt).status is classify(n, pt.swapped()).status


def test_classify_many_matches_classify(rng):
    x = rng.uniform(0, 1, 500)
    y = rng.uniform(0, 1, 500)
    codes, overlap = classify_many(8, x, y)
    assert not overlap.any()
    for i in range(0, 500, 25):
        status = classify(8, ExponentPoint(float(x[i]), float(y[i]))).status
        assert codes[i] == region.STATUS_CODES[status]


def test_classify_many_unbounded_beyond_threshold(rng):
    x = rng.uniform(0, 1, 10_000)
    y = rng.uniform(0, 1, 10_000)
    for n in (1, 2, 20):
        codes, _ = classify_many(n, x, y)
        beyond = x + y >= (2 * n - 1) / n
        assert np.all(codes[beyond] == region.STATUS_CODES[RegionStatus.UNBOUNDED])


def test_classify_many_rejects_out_of_range():
    with pytest.raises(DomainError):
        classify_many(2, [1.5], [0.0])

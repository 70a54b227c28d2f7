"""Exponent-region geometry of the bilinear spherical maximal operator.

Triples (1/p1, 1/p2, 1/p) live on the Hoelder plane 1/p = 1/p1 + 1/p2, so
every region below is a polygon in the (1/p1, 1/p2) coordinates. Rational
inputs are handled with exact ``Fraction`` arithmetic; float inputs use an
absolute tolerance of 1e-12.
"""

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Tuple

import numpy as np

from ..errors import DomainError, RegionOverlapError

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12

HALF_POINT = (Fraction(1, 2), Fraction(1, 2), Fraction(1))


class RegionStatus(enum.Enum):
    BOUNDED_RHOMBUS = "BoundedRhombus"
    BOUNDED_BANACH = "BoundedBanach"
    UNBOUNDED = "Unbounded"
    UNKNOWN = "Unknown"


# integer codes used by classify_many
STATUS_CODES = {
    RegionStatus.UNKNOWN: 0,
    RegionStatus.BOUNDED_RHOMBUS: 1,
    RegionStatus.BOUNDED_BANACH: 2,
    RegionStatus.UNBOUNDED: 3,
}

WITNESS = {
    RegionStatus.UNBOUNDED: "counterexample family: unbounded when p <= n/(2n-1), p1,p2 >= 1",
    RegionStatus.BOUNDED_RHOMBUS: "open rhombus P0 P1 P3 P2 with delta_n=(2n-15)/10, n >= 8",
    RegionStatus.BOUNDED_BANACH: "Banach range via the linear maximal multiplier, n >= 2",
    RegionStatus.UNKNOWN: "",
}

HALF_POINT_WITNESS = "L2 x L2 -> L1 estimate summed over dyadic pieces, n >= 8"


def _is_exact(*values):
    return all(isinstance(v, Rational) for v in values)


def _as_number(value):
    if isinstance(value, Rational):
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class ExponentPoint:
    inv_p1: object
    inv_p2: object
    inv_p: object = None

    def __post_init__(self):
        inv_p1 = _as_number(self.inv_p1)
        inv_p2 = _as_number(self.inv_p2)
        inv_p = inv_p1 + inv_p2 if self.inv_p is None else _as_number(self.inv_p)
        object.__setattr__(self, "inv_p1", inv_p1)
        object.__setattr__(self, "inv_p2", inv_p2)
        object.__setattr__(self, "inv_p", inv_p)

        for name, value in (("inv_p1", inv_p1), ("inv_p2", inv_p2)):
            if not 0 <= value <= 1:
                raise DomainError(f"{name}={value} outside [0, 1]")
        if _is_exact(inv_p1, inv_p2, inv_p):
            if inv_p != inv_p1 + inv_p2:
                raise DomainError(f"Hoelder relation violated: {inv_p} != {inv_p1} + {inv_p2}")
        elif abs(float(inv_p) - float(inv_p1) - float(inv_p2)) > TOLERANCE:
            raise DomainError(f"Hoelder relation violated: {inv_p} != {inv_p1} + {inv_p2}")

    @classmethod
    def from_exponents(cls, p1, p2):
        """Build a point from Lebesgue exponents (``float('inf')`` allowed)."""
        def reciprocal(p):
            if p == float("inf"):
                return Fraction(0)
            if p <= 0:
                raise DomainError(f"exponent {p} must be positive")
            return 1 / Fraction(p) if isinstance(p, Rational) else 1.0 / p
        return cls(reciprocal(p1), reciprocal(p2))

    def swapped(self):
        return ExponentPoint(self.inv_p2, self.inv_p1, self.inv_p)

    def as_tuple(self):
        return (self.inv_p1, self.inv_p2, self.inv_p)

    def to_dict(self):
        return {
            'inv_p1': str(self.inv_p1) if isinstance(self.inv_p1, Fraction) else self.inv_p1,
            'inv_p2': str(self.inv_p2) if isinstance(self.inv_p2, Fraction) else self.inv_p2,
            'inv_p': str(self.inv_p) if isinstance(self.inv_p, Fraction) else self.inv_p,
        }


@dataclass(frozen=True)
class RegionVerdict:
    status: RegionStatus
    witness: str = ""

    def __post_init__(self):
        if self.status is not RegionStatus.UNKNOWN and not self.witness:
            raise DomainError(f"verdict {self.status.value} needs a witness")

    @property
    def bounded(self):
        return self.status in (RegionStatus.BOUNDED_RHOMBUS, RegionStatus.BOUNDED_BANACH)


def delta_n(n):
    """Decay exponent (2n - 15)/10 of the dyadic pieces."""
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    return Fraction(2 * int(n) - 15, 10)


def decay_rate(n):
    """The same exponent written as n/5 - 3/2."""
    return Fraction(int(n), 5) - Fraction(3, 2)


def diagonal_piece_exponent(n):
    """Growth exponent 3/2 - n/5 of the diagonal part of the j-th piece."""
    return Fraction(3, 2) - Fraction(int(n), 5)


def offdiagonal_piece_exponent(n):
    """Decay exponent n - 1 of the off-diagonal part of the j-th piece."""
    return Fraction(int(n) - 1)


def threshold(n):
    """Largest p for which the counterexample family forces unboundedness."""
    return Fraction(int(n), 2 * int(n) - 1)


def _require_rhombus_dimension(n):
    if int(n) != n or n < 8:
        raise DomainError(f"the rhombus needs n >= 8 (delta_n > 0), got n={n}")


def diagonal_vertex(n):
    """The coordinate c = (1+2 delta_n)/(2+2 delta_n) of the diagonal vertex P3."""
    _require_rhombus_dimension(n)
    delta = delta_n(n)
    return (1 + 2 * delta) / (2 + 2 * delta)


def rhombus_vertices(n, alternate=False) -> Tuple[ExponentPoint, ExponentPoint, ExponentPoint, ExponentPoint]:
    """Vertices P0, P1, P2, P3 of the open rhombus of boundedness.

    ``alternate=True`` returns the variant whose axis vertices sit at
    (2n - 3/2)/(2n - 1) instead of 1.
    """
    _require_rhombus_dimension(n)
    c = diagonal_vertex(n)
    a = Fraction(4 * int(n) - 3, 2 * (2 * int(n) - 1)) if alternate else Fraction(1)
    return (
        ExponentPoint(Fraction(0), Fraction(0)),
        ExponentPoint(a, Fraction(0)),
        ExponentPoint(Fraction(0), a),
        ExponentPoint(c, c),
    )


def interpolation_threshold(n):
    """Diagonal exponent p above which L^p x L^p -> L^{p/2} holds."""
    _require_rhombus_dimension(n)
    delta = delta_n(n)
    return (2 + 2 * delta) / (1 + 2 * delta)


def diagonal_gap(n):
    """Distance along the diagonal between the bounded and unbounded regions."""
    _require_rhombus_dimension(n)
    delta = delta_n(n)
    return (1 + delta) / (1 + 2 * delta) - threshold(n)


def _edge_values(x, y, a, c):
    # Cross products for the edges of the convex polygon (0,0),(a,0),(c,c),(0,a),
    # counter-clockwise; a point is strictly inside when all four are positive.
    return (
        y,
        (c - a) * y - c * (x - a),
        -c * (y - c) - (a - c) * (x - c),
        x,
    )


def _in_open_rhombus(n, pt, alternate):
    vertices = rhombus_vertices(n, alternate)
    a = vertices[1].inv_p1
    c = vertices[3].inv_p1
    x, y = pt.inv_p1, pt.inv_p2
    edges = _edge_values(x, y, a, c)
    if _is_exact(x, y):
        return all(e > 0 for e in edges)
    return all(float(e) > TOLERANCE for e in edges)


def _is_half_point(pt):
    if _is_exact(*pt.as_tuple()):
        return pt.as_tuple() == HALF_POINT
    return all(abs(float(v) - float(h)) <= TOLERANCE for v, h in zip(pt.as_tuple(), HALF_POINT))


def _exceeds(value, bound):
    if _is_exact(value):
        return value >= bound
    return float(value) >= float(bound) - TOLERANCE


def _below(value, bound):
    if _is_exact(value):
        return value < bound
    return float(value) < float(bound) - TOLERANCE


def classify(n, pt: ExponentPoint, alternate=False) -> RegionVerdict:
    """Classify a Hoelder triple as bounded, unbounded or unknown in dimension n."""
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    n = int(n)

    unbounded = _exceeds(pt.inv_p, Fraction(2 * n - 1, n))

    rhombus = False
    if n >= 8:
        rhombus = _is_half_point(pt) or _in_open_rhombus(n, pt, alternate)
    banach = n >= 2 and _below(pt.inv_p1, 1) and _below(pt.inv_p2, 1) and _below(pt.inv_p, 1)

    if unbounded and (rhombus or banach):
        raise RegionOverlapError(f"classify: n={n} point {pt.as_tuple()} is both bounded and unbounded")

    if unbounded:
        return RegionVerdict(RegionStatus.UNBOUNDED, WITNESS[RegionStatus.UNBOUNDED])
    if rhombus:
        witness = HALF_POINT_WITNESS if _is_half_point(pt) else WITNESS[RegionStatus.BOUNDED_RHOMBUS]
        return RegionVerdict(RegionStatus.BOUNDED_RHOMBUS, witness)
    if banach:
        return RegionVerdict(RegionStatus.BOUNDED_BANACH, WITNESS[RegionStatus.BOUNDED_BANACH])
    return RegionVerdict(RegionStatus.UNKNOWN)


def classify_many(n, inv_p1, inv_p2, alternate=False):
    """Vectorised ``classify`` for float arrays; returns (codes, overlap_mask).

    Codes follow ``STATUS_CODES``. ``overlap_mask`` flags points that satisfy
    both a bounded and the unbounded condition; it must be all False.
    """
    n = int(n)
    x = np.asarray(inv_p1, dtype=float)
    y = np.asarray(inv_p2, dtype=float)
    if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1)):
        raise DomainError("classify_many: reciprocal exponents must lie in [0, 1]")
    s = x + y

    unbounded = s >= (2 * n - 1) / n - TOLERANCE
    rhombus = np.zeros_like(unbounded)
    if n >= 8:
        vertices = rhombus_vertices(n, alternate)
        a = float(vertices[1].inv_p1)
        c = float(vertices[3].inv_p1)
        edges = _edge_values(x, y, a, c)
        rhombus = np.logical_and.reduce([e > TOLERANCE for e in edges])
        rhombus |= (np.abs(x - 0.5) <= TOLERANCE) & (np.abs(y - 0.5) <= TOLERANCE)
    banach = np.zeros_like(unbounded)
    if n >= 2:
        banach = (x < 1 - TOLERANCE) & (y < 1 - TOLERANCE) & (s < 1 - TOLERANCE)

    codes = np.zeros(x.shape, dtype=np.int8)
    codes[banach] = STATUS_CODES[RegionStatus.BOUNDED_BANACH]
    codes[rhombus] = STATUS_CODES[RegionStatus.BOUNDED_RHOMBUS]
    codes[unbounded] = STATUS_CODES[RegionStatus.UNBOUNDED]
    overlap = unbounded & (rhombus | banach)
    logger.debug("classify_many: n=%d points=%d overlaps=%d", n, x.size, int(overlap.sum()))
    return codes, overlap

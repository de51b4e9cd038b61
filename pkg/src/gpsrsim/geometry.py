"""Planar geometry kernel: distances, predicates, RNG/GG planarization and the
counterclockwise sweep behind the right-hand rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

TWO_PI = 2.0 * math.pi

# Shewchuk's static error bound for the floating-point orient2d filter.
_EPS = 2.0 ** -53
_CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


@dataclass(frozen=True, slots=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate: ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True, slots=True)
class Segment:
    a: Position
    b: Position

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"zero-length segment at {self.a}")


Neighbor = Tuple[int, Position]


def distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def distance_sq(a: Position, b: Position) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return dx * dx + dy * dy


def bearing(origin: Position, target: Position) -> float:
    """Angle of ``target`` seen from ``origin``, in [0, 2*pi)."""
    angle = math.atan2(target.y - origin.y, target.x - origin.x)
    return angle + TWO_PI if angle < 0.0 else angle


def orient(a: Position, b: Position, c: Position) -> int:
    """Sign of the turn a -> b -> c: +1 counterclockwise, -1 clockwise, 0 collinear.

    The float determinant is trusted when it clears the error bound; otherwise
    the sign is recomputed exactly with rationals.
    """
    detleft = (a.x - c.x) * (b.y - c.y)
    detright = (a.y - c.y) * (b.x - c.x)
    det = detleft - detright
    bound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (a.x, a.y, b.x, b.y, c.x, c.y))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


# Relative gap below which squared-distance comparisons are redone exactly.
_TIE_GAP = 1e-12


def _exact_distance_sq(a: Position, b: Position) -> Fraction:
    dx = Fraction(a.x) - Fraction(b.x)
    dy = Fraction(a.y) - Fraction(b.y)
    return dx * dx + dy * dy


def _near(p: float, q: float) -> bool:
    return abs(p - q) <= _TIE_GAP * (abs(p) + abs(q))


def rng_keep_edge(u: Position, v: Position, witnesses: Iterable[Position]) -> bool:
    """Relative Neighborhood Graph test: keep (u, v) unless some witness is
    strictly closer to both endpoints than they are to each other."""
    duv = distance_sq(u, v)
    for w in witnesses:
        far = max(distance_sq(u, w), distance_sq(v, w))
        if _near(duv, far):
            exact_far = max(_exact_distance_sq(u, w), _exact_distance_sq(v, w))
            if _exact_distance_sq(u, v) > exact_far:
                return False
        elif duv > far:
            return False
    return True


def gg_keep_edge(u: Position, v: Position, witnesses: Iterable[Position]) -> bool:
    """Gabriel Graph test: keep (u, v) only if no witness lies in or on the
    circle with diameter uv."""
    duv = distance_sq(u, v)
    for w in witnesses:
        both = distance_sq(u, w) + distance_sq(v, w)
        if _near(duv, both):
            exact_both = _exact_distance_sq(u, w) + _exact_distance_sq(v, w)
            if not _exact_distance_sq(u, v) < exact_both:
                return False
        elif not duv < both:
            return False
    return True


_FILTERS = {"RNG": rng_keep_edge, "GG": gg_keep_edge}


def planarize(
    self_pos: Position, neighbors: Iterable[Neighbor], method: str = "GG"
) -> list[Neighbor]:
    """Neighbors whose edge to ``self_pos`` survives the RNG or GG filter.

    Only the local neighbor set is used as witnesses. Output keeps input order.
    """
    try:
        keep = _FILTERS[method.upper()]
    except KeyError:
        raise ValueError(f"unknown planarization method {method!r}") from None
    neighbors = list(neighbors)
    kept = []
    for i, (nid, pos) in enumerate(neighbors):
        witnesses = (p for j, (_, p) in enumerate(neighbors) if j != i)
        if keep(self_pos, pos, witnesses):
            kept.append((nid, pos))
    return kept


def _canonical(s: Segment) -> tuple[Position, Position]:
    return (s.a, s.b) if (s.a.x, s.a.y) <= (s.b.x, s.b.y) else (s.b, s.a)


def segments_cross(s1: Segment, s2: Segment) -> Optional[Position]:
    """Proper intersection point of two segments, or None.

    Touching at an endpoint, collinear overlap and disjoint segments all
    report None.
    """
    p1, p2 = _canonical(s1)
    q1, q2 = _canonical(s2)
    # fixed argument order makes the computed point bit-identical under swaps
    if (p1.x, p1.y, p2.x, p2.y) > (q1.x, q1.y, q2.x, q2.y):
        p1, p2, q1, q2 = q1, q2, p1, p2
    if orient(p1, p2, q1) * orient(p1, p2, q2) >= 0:
        return None
    if orient(q1, q2, p1) * orient(q1, q2, p2) >= 0:
        return None
    rx, ry = p2.x - p1.x, p2.y - p1.y
    sx, sy = q2.x - q1.x, q2.y - q1.y
    denom = rx * sy - ry * sx
    t = ((q1.x - p1.x) * sy - (q1.y - p1.y) * sx) / denom
    return Position(p1.x + t * rx, p1.y + t * ry)


def right_hand_next(
    self_pos: Position,
    reference: Union[float, Position],
    neighbors: Sequence[Neighbor],
) -> Neighbor:
    """First neighbor met sweeping counterclockwise from ``reference``.

    ``reference`` is either a bearing in radians or a position whose bearing
    from ``self_pos`` is used. A neighbor lying exactly on the reference
    direction is taken only after a full turn, so the edge a packet arrived
    on is chosen only when it is the sole candidate. Equal bearings go to the
    nearer neighbor, then the smaller id.
    """
    if not neighbors:
        raise ValueError("right_hand_next needs at least one neighbor")
    if isinstance(reference, Position):
        ref = bearing(self_pos, reference)
    else:
        ref = float(reference) % TWO_PI

    def sweep_key(item: Neighbor):
        nid, pos = item
        delta = (bearing(self_pos, pos) - ref) % TWO_PI
        if delta == 0.0:
            delta = TWO_PI
        return (delta, distance_sq(self_pos, pos), nid)

    return min(neighbors, key=sweep_key)

"""Planar geometry used by every forwarding decision.

Positions are plain ``(x, y)`` tuples in meters. Angles come from ``atan2`` of
cross and dot products so results stay well defined near 0 and 180 degrees.
"""

from __future__ import annotations

import math
from typing import NamedTuple


class Position(NamedTuple):
    x: float
    y: float


NodeId = int


class DegenerateGeometry(ValueError):
    """Raised when an angle is requested against a zero-length ray."""


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def signed_offset(u, v, d) -> float:
    """Signed angle in degrees from ray u->d to ray u->v, in (-180, 180].

    Positive means v lies on the counterclockwise side of the line u->d.
    """
    dx, dy = d[0] - u[0], d[1] - u[1]
    vx, vy = v[0] - u[0], v[1] - u[1]
    if (dx == 0 and dy == 0) or (vx == 0 and vy == 0):
        raise DegenerateGeometry("angle undefined for coincident points")
    cross = dx * vy - dy * vx
    dot = dx * vx + dy * vy
    ang = math.degrees(math.atan2(cross, dot))
    # atan2 returns -180 for a ray exactly behind with -0.0 cross
    return 180.0 if ang == -180.0 else ang


def angular_offset(u, v, d) -> float:
    """Unsigned angle at u between rays u->v and u->d, in [0, 180]."""
    return abs(signed_offset(u, v, d))


def projection_advance(u, v, d) -> float:
    """Scalar projection of u->v onto the unit vector u->d (signed meters)."""
    dx, dy = d[0] - u[0], d[1] - u[1]
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise DegenerateGeometry("projection onto a zero-length segment")
    return ((v[0] - u[0]) * dx + (v[1] - u[1]) * dy) / norm


def bearing(u, v) -> float:
    """Direction of u->v in radians, in [0, 2*pi)."""
    ang = math.atan2(v[1] - u[1], v[0] - u[0])
    return ang + 2 * math.pi if ang < 0 else ang


def segment_intersection(p1, p2, q1, q2):
    """Intersection point of segments p1p2 and q1q2, or None.

    Only proper or endpoint-touching intersections of non-parallel segments are
    reported; collinear overlap returns None.
    """
    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    denom = rx * sy - ry * sx
    if denom == 0:
        return None
    qpx, qpy = q1[0] - p1[0], q1[1] - p1[1]
    t = (qpx * sy - qpy * sx) / denom
    s = (qpx * ry - qpy * rx) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
        return Position(p1[0] + t * rx, p1[1] + t * ry)
    return None


def segments_cross(p1, p2, q1, q2) -> bool:
    """True when the open segments cross at a single interior point."""
    def orient(a, b, c):
        val = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (val > 0) - (val < 0)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0

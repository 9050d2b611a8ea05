"""Plane geometry for three-point measurements.

Coordinates are right-handed with x pointing east, y pointing north and
z pointing up. A measurement is the plane through three points; the
derived compass quantities follow the usual field convention:

    dip            angle between the plane and the horizontal, 0..90 deg
    dip direction  compass bearing of steepest descent (clockwise from north)
    strike         dip direction minus 90 deg, so the plane dips to the
                   right when looking along strike

The plane normal is flipped to point upward before any angle is taken,
which makes the result independent of point order and orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DegenerateGeometry, InvalidInput

# A dip this small has no meaningful azimuth; report 0 for both bearings.
HORIZONTAL_DIP_DEG = 1e-9

# Cross-product magnitude below this fraction of |u||v| means collinear.
COLLINEAR_REL_TOL = 1e-12

Point = tuple[float, float, float]


@dataclass(frozen=True)
class StrikeDip:
    strike_deg: float
    dip_deg: float
    dip_direction_deg: float


def _as_point(value) -> Point:
    try:
        x, y, z = value
        point = (float(x), float(y), float(z))
    except (TypeError, ValueError):
        raise InvalidInput(f"not a 3-D point: {value!r}") from None
    if not all(math.isfinite(c) for c in point):
        raise InvalidInput(f"point has non-finite coordinate: {value!r}")
    return point


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a: Point, b: Point) -> Point:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _norm(a: Point) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def plane_normal(p1, p2, p3) -> Point:
    """Unit normal of the plane through three points, flipped upward.

    Raises DegenerateGeometry when the points are (numerically)
    collinear; the test is scale-invariant.
    """
    a = _as_point(p1)
    b = _as_point(p2)
    c = _as_point(p3)
    u = _sub(b, a)
    v = _sub(c, a)
    n = _cross(u, v)
    n_len = _norm(n)
    if n_len <= COLLINEAR_REL_TOL * _norm(u) * _norm(v):
        raise DegenerateGeometry("measurement points are collinear")
    n = (n[0] / n_len, n[1] / n_len, n[2] / n_len)
    if n[2] < 0.0:
        n = (-n[0], -n[1], -n[2])
    elif n[2] == 0.0 and (n[0] < 0.0 or (n[0] == 0.0 and n[1] < 0.0)):
        # Vertical plane: pick the representative with bearing in [0, 180).
        n = (-n[0], -n[1], -n[2])
    return n


def strike_dip(p1, p2, p3) -> StrikeDip:
    """Strike, dip and dip direction (degrees) of the plane through
    three points."""
    n = plane_normal(p1, p2, p3)
    dip = math.degrees(math.acos(min(1.0, max(-1.0, n[2]))))
    if dip < HORIZONTAL_DIP_DEG:
        return StrikeDip(strike_deg=0.0, dip_deg=dip, dip_direction_deg=0.0)
    dip_direction = math.degrees(math.atan2(n[0], n[1])) % 360.0
    strike = (dip_direction - 90.0) % 360.0
    return StrikeDip(strike_deg=strike, dip_deg=dip, dip_direction_deg=dip_direction)

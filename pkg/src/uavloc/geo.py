"""WGS84 geodesy helpers: haversine distance and a local planar projection.

All distances are in meters on a spherical Earth of radius 6 371 000 m.
The projection is a local equirectangular plane about a survey origin,
accurate to well under 0.1% inside the survey areas this pipeline targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

# project() refuses points beyond this range; the small-area linearization
# breaks down long before the numbers do.
MAX_PROJECTION_RANGE_M = 100_000.0


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinates: ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} out of [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} out of [-180, 180]")


@dataclass(frozen=True)
class PlanarPoint:
    """Local planar coordinates: x meters east, y meters north of the origin."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite planar point: ({self.x}, {self.y})")


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in meters."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = math.radians(b.lat - a.lat)
    dlon = math.radians(b.lon - a.lon)
    h = (math.sin(dlat / 2.0) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def project(origin: GeoPoint, p: GeoPoint) -> PlanarPoint:
    """Project p onto the local tangent plane about origin.

    Raises ValueError if p is more than 100 km from origin, where the
    small-area assumption no longer holds.
    """
    d = haversine(origin, p)
    if d > MAX_PROJECTION_RANGE_M:
        raise ValueError(
            f"point {d:.0f} m from origin exceeds projection range "
            f"({MAX_PROJECTION_RANGE_M:.0f} m)")
    x = EARTH_RADIUS_M * math.radians(p.lon - origin.lon) * math.cos(math.radians(origin.lat))
    y = EARTH_RADIUS_M * math.radians(p.lat - origin.lat)
    return PlanarPoint(x, y)


def unproject(origin: GeoPoint, q: PlanarPoint) -> GeoPoint:
    """Exact inverse of project() for the same origin."""
    lat = origin.lat + math.degrees(q.y / EARTH_RADIUS_M)
    lon = origin.lon + math.degrees(q.x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    return GeoPoint(lat, lon)

"""Geodesic distance, agent motion and the energy-cost model.

Distances are great-circle over a sphere of radius 6 371 008.8 m; altitude
is carried through positions but never enters a distance. Hazard testing
uses a local equirectangular projection about the segment midpoint, which
is plenty at the few-kilometre extents scenarios use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .scenario import AgentSpec, GeoPosition, HazardSpec

EARTH_RADIUS_M = 6_371_008.8


@dataclass(frozen=True)
class EnergyModel:
    """Linear flight cost plus a fixed penalty per hazard disk crossed."""

    joules_per_meter: float = 1.0


def haversine_distance(a: GeoPosition, b: GeoPosition) -> float:
    """Great-circle distance in meters between two positions."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = math.radians(b.lat - a.lat)
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing(a: GeoPosition, b: GeoPosition) -> float:
    """Forward azimuth from a to b, radians east of north."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlon = math.radians(b.lon - a.lon)
    x = math.sin(dlon) * math.cos(lat2)
    y = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return math.atan2(x, y)


def destination_point(pos: GeoPosition, bearing: float, distance: float) -> GeoPosition:
    """Point reached travelling ``distance`` meters along ``bearing``."""
    delta = distance / EARTH_RADIUS_M
    lat1 = math.radians(pos.lat)
    lon1 = math.radians(pos.lon)
    sin_lat2 = math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(bearing)
    lat2 = math.asin(max(-1.0, min(1.0, sin_lat2)))
    y = math.sin(bearing) * math.sin(delta) * math.cos(lat1)
    x = math.cos(delta) - math.sin(lat1) * sin_lat2
    lon2 = lon1 + math.atan2(y, x)
    # normalize lon to [-180, 180]
    lon_deg = math.degrees(lon2)
    if lon_deg > 180.0:
        lon_deg -= 360.0
    elif lon_deg < -180.0:
        lon_deg += 360.0
    return GeoPosition(math.degrees(lat2), lon_deg, pos.alt)


def step_towards(pos: GeoPosition, dest: GeoPosition, speed: float, dt: float) -> GeoPosition:
    """Advance along the great circle by min(speed*dt, remaining distance).

    Lands exactly on ``dest`` (altitude included) once it is within one step.
    """
    remaining = haversine_distance(pos, dest)
    step = speed * dt
    if remaining <= step or remaining == 0.0:
        return dest
    moved = destination_point(pos, initial_bearing(pos, dest), step)
    # interpolate altitude with the travelled fraction
    frac = step / remaining
    return GeoPosition(moved.lat, moved.lon, pos.alt + frac * (dest.alt - pos.alt))


def _local_xy(p: GeoPosition, origin_lat: float, origin_lon: float, cos_lat: float) -> tuple[float, float]:
    x = EARTH_RADIUS_M * math.radians(p.lon - origin_lon) * cos_lat
    y = EARTH_RADIUS_M * math.radians(p.lat - origin_lat)
    return x, y


def segment_intersects_disk(a: GeoPosition, b: GeoPosition, center: GeoPosition, radius: float) -> bool:
    """True iff the segment a-b passes within ``radius`` meters of ``center``.

    Worked in an equirectangular tangent plane about the segment midpoint.
    """
    mid_lat = (a.lat + b.lat) / 2.0
    mid_lon = (a.lon + b.lon) / 2.0
    cos_lat = math.cos(math.radians(mid_lat))
    ax, ay = _local_xy(a, mid_lat, mid_lon, cos_lat)
    bx, by = _local_xy(b, mid_lat, mid_lon, cos_lat)
    cx, cy = _local_xy(center, mid_lat, mid_lon, cos_lat)

    dx, dy = bx - ax, by - ay
    seg_sq = dx * dx + dy * dy
    if seg_sq == 0.0:
        dist_sq = (cx - ax) ** 2 + (cy - ay) ** 2
    else:
        t = ((cx - ax) * dx + (cy - ay) * dy) / seg_sq
        t = max(0.0, min(1.0, t))
        px, py = ax + t * dx, ay + t * dy
        dist_sq = (cx - px) ** 2 + (cy - py) ** 2
    return dist_sq <= radius * radius


def point_in_disk(p: GeoPosition, center: GeoPosition, radius: float) -> bool:
    return haversine_distance(p, center) <= radius


def energy_cost(
    agent: AgentSpec,
    origin: GeoPosition,
    dest: GeoPosition,
    hazards: Sequence[HazardSpec],
    model: EnergyModel = EnergyModel(),
) -> float:
    """Flight energy for the straight leg origin->dest.

    Distance times joules_per_meter, plus the penalty of every hazard whose
    disk the leg crosses. The agent parameter is kept for future per-agent
    cost shaping; the current model only depends on the leg.
    """
    del agent
    cost = haversine_distance(origin, dest) * model.joules_per_meter
    for hz in hazards:
        if segment_intersects_disk(origin, dest, hz.center, hz.radius):
            cost += hz.penalty
    return cost

/** Display-only projection between geographic coordinates and the abstract
 * map plane. The console draws on a local flat plane centered on the
 * scenario; nothing computed here feeds back into simulation values.
 */

export interface PlanePoint {
  /** Meters east of the projection origin. */
  x: number;
  /** Meters north of the projection origin. */
  y: number;
}

const METERS_PER_DEG_LAT = 111_320;

export interface Projection {
  toPlane(lat: number, lon: number): PlanePoint;
  toGeo(point: PlanePoint): { lat: number; lon: number };
}

export function makeProjection(originLat: number, originLon: number): Projection {
  const metersPerDegLon = METERS_PER_DEG_LAT * Math.cos((originLat * Math.PI) / 180);
  return {
    toPlane(lat: number, lon: number): PlanePoint {
      return {
        x: (lon - originLon) * metersPerDegLon,
        y: (lat - originLat) * METERS_PER_DEG_LAT,
      };
    },
    toGeo(point: PlanePoint) {
      return {
        lat: originLat + point.y / METERS_PER_DEG_LAT,
        lon: originLon + point.x / metersPerDegLon,
      };
    },
  };
}

/** Center and span of a set of points, for fitting the map viewport. */
export function boundsOf(points: Array<{ lat: number; lon: number }>): {
  centerLat: number;
  centerLon: number;
  spanLat: number;
  spanLon: number;
} {
  if (points.length === 0) {
    return { centerLat: 0, centerLon: 0, spanLat: 0.01, spanLon: 0.01 };
  }
  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const p of points) {
    minLat = Math.min(minLat, p.lat);
    maxLat = Math.max(maxLat, p.lat);
    minLon = Math.min(minLon, p.lon);
    maxLon = Math.max(maxLon, p.lon);
  }
  return {
    centerLat: (minLat + maxLat) / 2,
    centerLon: (minLon + maxLon) / 2,
    spanLat: Math.max(maxLat - minLat, 1e-4),
    spanLon: Math.max(maxLon - minLon, 1e-4),
  };
}

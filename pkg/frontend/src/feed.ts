/** Camera-feed presentation.
 *
 * The rendered grid is a pure function of the image descriptor: a
 * resolution-level-k image is a 2^k by 2^k grid of grayscale cells and is
 * drawn exactly as received.
 */

import { FeedView, ImageDescriptor } from "./protocol.js";

export function gridSide(resolutionLevel: number): number {
  if (!Number.isInteger(resolutionLevel) || resolutionLevel < 0 || resolutionLevel > 8) {
    throw new RangeError(`resolution level out of range: ${resolutionLevel}`);
  }
  return 2 ** resolutionLevel;
}

/** Row-major rows of grayscale values; rejects a descriptor whose cell
 * count disagrees with its declared size. */
export function imageRows(image: ImageDescriptor): number[][] {
  const { size, cells } = image;
  if (!Number.isInteger(size) || size < 1) {
    throw new RangeError(`bad image size: ${size}`);
  }
  if (cells.length !== size * size) {
    throw new RangeError(`image has ${cells.length} cells, expected ${size * size}`);
  }
  const rows: number[][] = [];
  for (let r = 0; r < size; r += 1) {
    rows.push(cells.slice(r * size, (r + 1) * size));
  }
  return rows;
}

/** Grid for a feed, checking the size-matches-level invariant. */
export function feedGrid(feed: FeedView): number[][] {
  const side = gridSide(feed.resolution_level);
  if (feed.image.size !== side) {
    throw new RangeError(
      `feed image size ${feed.image.size} does not match level ${feed.resolution_level}`,
    );
  }
  return imageRows(feed.image);
}

/** Clarity as a 0..100 integer for the clarity bar. */
export function clarityPercent(clarity: number): number {
  const clamped = Math.min(1, Math.max(0, clarity));
  return Math.round(clamped * 100);
}

export function cellColor(value: number): string {
  const v = Math.min(255, Math.max(0, Math.round(value)));
  return `rgb(${v},${v},${v})`;
}

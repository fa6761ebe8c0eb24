import { describe, expect, it } from "vitest";

import { cellColor, clarityPercent, feedGrid, gridSide, imageRows } from "../src/feed.js";
import { makeFeed } from "./helpers.js";

describe("grid geometry", () => {
  it("level k renders a 2^k by 2^k grid, for every level", () => {
    for (let level = 0; level <= 8; level += 1) {
      const side = gridSide(level);
      expect(side).toBe(2 ** level);
      const rows = feedGrid(makeFeed({ resolution_level: level }));
      expect(rows).toHaveLength(side);
      for (const row of rows) expect(row).toHaveLength(side);
    }
  });

  it("rejects levels outside 0..8", () => {
    expect(() => gridSide(-1)).toThrow(RangeError);
    expect(() => gridSide(9)).toThrow(RangeError);
    expect(() => gridSide(2.5)).toThrow(RangeError);
  });

  it("rejects a feed whose image size disagrees with its level", () => {
    const feed = makeFeed({ resolution_level: 3 });
    feed.image = { size: 4, cells: new Array(16).fill(0) };
    expect(() => feedGrid(feed)).toThrow(/does not match level/);
  });

  it("rejects an image whose cell count disagrees with its size", () => {
    expect(() => imageRows({ size: 4, cells: new Array(15).fill(0) })).toThrow(/15 cells/);
    expect(() => imageRows({ size: 0, cells: [] })).toThrow(RangeError);
  });

  it("slices cells row-major", () => {
    const rows = imageRows({ size: 2, cells: [10, 20, 30, 40] });
    expect(rows).toEqual([
      [10, 20],
      [30, 40],
    ]);
  });

  it("rendering is a pure function of the descriptor", () => {
    const feed = makeFeed({ resolution_level: 4 });
    expect(feedGrid(feed)).toEqual(feedGrid(makeFeed({ resolution_level: 4 })));
  });
});

describe("clarity bar", () => {
  it("maps clarity to a clamped percentage", () => {
    expect(clarityPercent(0)).toBe(0);
    expect(clarityPercent(0.31)).toBe(31);
    expect(clarityPercent(1)).toBe(100);
    expect(clarityPercent(1.7)).toBe(100);
    expect(clarityPercent(-0.2)).toBe(0);
  });
});

describe("cell colours", () => {
  it("produces grayscale css with clamped values", () => {
    expect(cellColor(0)).toBe("rgb(0,0,0)");
    expect(cellColor(235)).toBe("rgb(235,235,235)");
    expect(cellColor(400)).toBe("rgb(255,255,255)");
    expect(cellColor(-3)).toBe("rgb(0,0,0)");
  });
});

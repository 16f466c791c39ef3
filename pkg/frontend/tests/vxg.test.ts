import { describe, expect, it } from "vitest";

import {
  countVoxels,
  dumpVxg1,
  emptyGrid,
  flatIndex,
  getVoxel,
  GridFormatError,
  HEADER_BYTES,
  parseVxg1,
  setVoxel,
} from "../src/lib/vxg";

function seededGrid(resolution: number, seed: number, density = 0.3) {
  // xorshift32 keeps the fixture reproducible without any RNG dependency
  let state = seed >>> 0 || 1;
  const next = () => {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    return state / 0xffffffff;
  };
  const grid = emptyGrid(resolution);
  for (let i = 0; i < grid.occupancy.length; i++) {
    grid.occupancy[i] = next() < density ? 1 : 0;
  }
  return grid;
}

describe("header layout", () => {
  it("serialises the documented 24-byte little-endian header", () => {
    const grid = emptyGrid(2, 0.75);
    grid.origin = [1, 2, 3];
    const bytes = dumpVxg1(grid);
    expect(bytes.length).toBe(HEADER_BYTES + 1); // 8 voxels -> 1 payload byte
    expect(String.fromCharCode(...bytes.slice(0, 4))).toBe("VXG1");
    const view = new DataView(bytes.buffer);
    expect(view.getUint32(4, true)).toBe(2);
    expect(view.getFloat32(8, true)).toBeCloseTo(0.75, 6);
    expect(view.getFloat32(12, true)).toBe(1);
    expect(view.getFloat32(16, true)).toBe(2);
    expect(view.getFloat32(20, true)).toBe(3);
  });

  it("packs bits LSB-first in x-fastest order", () => {
    const grid = emptyGrid(4);
    setVoxel(grid, 1, 0, 0); // flat 1 -> byte 0, bit 1
    setVoxel(grid, 0, 1, 0); // flat 4 -> byte 0, bit 4
    setVoxel(grid, 0, 0, 1); // flat 16 -> byte 2, bit 0
    const payload = dumpVxg1(grid).slice(HEADER_BYTES);
    expect(payload[0]).toBe((1 << 1) | (1 << 4));
    expect(payload[1]).toBe(0);
    expect(payload[2]).toBe(1);
  });

  it("flat order is x + y*R + z*R^2", () => {
    expect(flatIndex(16, 3, 2, 1)).toBe(3 + 2 * 16 + 256);
  });
});

describe("round trip", () => {
  it("parse(dump(grid)) preserves every field", () => {
    for (const seed of [1, 2, 3]) {
      const grid = seededGrid(16, seed);
      grid.voxelSize = 48 / 16;
      grid.origin = [-24, -24, 0];
      const back = parseVxg1(dumpVxg1(grid));
      expect(back.resolution).toBe(16);
      expect(back.voxelSize).toBeCloseTo(3, 6);
      expect(back.origin).toEqual([-24, -24, 0]);
      expect(back.occupancy).toEqual(grid.occupancy);
    }
  });

  it("handles non-multiple-of-8 voxel counts", () => {
    const grid = seededGrid(3, 9, 0.5); // 27 bits -> 4 payload bytes
    const bytes = dumpVxg1(grid);
    expect(bytes.length).toBe(HEADER_BYTES + 4);
    expect(parseVxg1(bytes).occupancy).toEqual(grid.occupancy);
  });

  it("counts match", () => {
    const grid = seededGrid(8, 77, 0.4);
    expect(countVoxels(parseVxg1(dumpVxg1(grid)))).toBe(countVoxels(grid));
    expect(getVoxel(grid, 0, 0, 0)).toBe(grid.occupancy[0]);
  });
});

describe("errors", () => {
  it("rejects truncated headers", () => {
    expect(() => parseVxg1(new Uint8Array(10))).toThrow(GridFormatError);
    expect(() => parseVxg1(new Uint8Array(10))).toThrow(/truncated header/);
  });

  it("rejects bad magic", () => {
    const bytes = dumpVxg1(emptyGrid(2));
    bytes[0] = 0x58;
    expect(() => parseVxg1(bytes)).toThrow(/bad magic/);
  });

  it("rejects zero resolution", () => {
    const bytes = dumpVxg1(emptyGrid(2));
    new DataView(bytes.buffer).setUint32(4, 0, true);
    expect(() => parseVxg1(bytes)).toThrow(/zero resolution/);
  });

  it("rejects truncated payloads", () => {
    const bytes = dumpVxg1(seededGrid(8, 5));
    expect(() => parseVxg1(bytes.slice(0, bytes.length - 1))).toThrow(/truncated payload/);
  });
});

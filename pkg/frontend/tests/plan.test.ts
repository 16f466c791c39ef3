import { describe, expect, it } from "vitest";

import { base64ToBytes, bytesToBase64 } from "../src/lib/b64";
import { PlanModel } from "../src/lib/plan";
import { pointerToCell } from "../src/ui/planEditor";

describe("base64", () => {
  it("matches the reference vectors", () => {
    const enc = new TextEncoder();
    expect(bytesToBase64(enc.encode("Man"))).toBe("TWFu");
    expect(bytesToBase64(enc.encode("Ma"))).toBe("TWE=");
    expect(bytesToBase64(enc.encode("M"))).toBe("TQ==");
    expect(bytesToBase64(new Uint8Array())).toBe("");
  });

  it("round trips arbitrary bytes", () => {
    const bytes = new Uint8Array(257);
    for (let i = 0; i < bytes.length; i++) bytes[i] = (i * 31 + 7) % 256;
    expect(base64ToBytes(bytesToBase64(bytes))).toEqual(bytes);
  });

  it("rejects malformed input", () => {
    expect(() => base64ToBytes("abc")).toThrow(/multiple of 4/);
    expect(() => base64ToBytes("ab!d")).toThrow(/invalid base64/);
  });
});

describe("plan model", () => {
  it("stores cell (x, y) at flat index x*R + y", () => {
    const plan = new PlanModel(8);
    plan.set(3, 5, 1);
    expect(plan.cells[3 * 8 + 5]).toBe(1);
    expect(plan.get(3, 5)).toBe(1);
    expect(plan.count()).toBe(1);
  });

  it("round trips through base64 with equality on every known cell", () => {
    const plan = new PlanModel(16);
    plan.fillRect(2, 2, 9, 5, 1); // L-shaped footprint
    plan.fillRect(2, 5, 4, 12, 1);
    plan.set(15, 15, 1);
    const wire = plan.toBase64();
    const back = PlanModel.fromBase64(wire, 16);
    expect(back.equals(plan)).toBe(true);
    for (const [x, y] of plan.occupiedCells()) {
      expect(back.get(x, y)).toBe(1);
    }
    expect(back.count()).toBe(plan.count());
    // wire payload is exactly R^2 bytes
    expect(base64ToBytes(wire).length).toBe(256);
  });

  it("rejects a wire payload of the wrong size", () => {
    const plan = new PlanModel(16);
    expect(() => PlanModel.fromBase64(plan.toBase64(), 32)).toThrow(/32x32/);
  });

  it("fillRect clamps to the grid", () => {
    const plan = new PlanModel(4);
    plan.fillRect(-3, -3, 99, 0, 1);
    expect(plan.count()).toBe(4);
  });

  it("range-checks cell access", () => {
    const plan = new PlanModel(4);
    expect(() => plan.get(4, 0)).toThrow(RangeError);
    expect(() => plan.set(0, -1, 1)).toThrow(RangeError);
  });
});

describe("pointer mapping", () => {
  const rect = { left: 10, top: 20, width: 160, height: 160 };

  it("maps canvas pixels to cells with y flipped", () => {
    // top-left pixel is cell (0, R-1); bottom-left is (0, 0)
    expect(pointerToCell(rect, 16, 11, 21)).toEqual([0, 15]);
    expect(pointerToCell(rect, 16, 11, 179)).toEqual([0, 0]);
    expect(pointerToCell(rect, 16, 169, 21)).toEqual([15, 15]);
  });

  it("returns null outside the canvas", () => {
    expect(pointerToCell(rect, 16, 9, 21)).toBeNull();
    expect(pointerToCell(rect, 16, 171, 21)).toBeNull();
    expect(pointerToCell(rect, 16, 11, 181)).toBeNull();
  });

  it("agrees with the editor's cell granularity", () => {
    const cell = pointerToCell(rect, 16, 10 + 5 * 10 + 3, 20 + 2 * 10 + 3);
    expect(cell).toEqual([5, 13]);
  });
});

/**
 * Ground-plan bitmaps for plan-conditioned completion.
 *
 * A plan is an R x R byte raster over the horizontal axes, stored row-major
 * with cell (x, y) at flat index x*R + y; nonzero means occupied footprint.
 * On the wire it travels as base64 of those R^2 bytes.
 */

import { base64ToBytes, bytesToBase64 } from "./b64";

export class PlanModel {
  readonly resolution: number;
  readonly cells: Uint8Array;

  constructor(resolution: number, cells?: Uint8Array) {
    if (!Number.isInteger(resolution) || resolution <= 0) {
      throw new Error(`bad plan resolution ${resolution}`);
    }
    if (cells !== undefined && cells.length !== resolution * resolution) {
      throw new Error(`plan needs ${resolution * resolution} cells, got ${cells.length}`);
    }
    this.resolution = resolution;
    this.cells = cells ? cells.slice() : new Uint8Array(resolution * resolution);
  }

  get(x: number, y: number): number {
    this.check(x, y);
    return this.cells[x * this.resolution + y];
  }

  set(x: number, y: number, value: number): void {
    this.check(x, y);
    this.cells[x * this.resolution + y] = value ? 1 : 0;
  }

  /** Set every cell of an axis-aligned rectangle, clamped to the grid. */
  fillRect(x0: number, y0: number, x1: number, y1: number, value: number): void {
    const lo = (v: number) => Math.max(0, Math.min(this.resolution - 1, v));
    for (let x = lo(Math.min(x0, x1)); x <= lo(Math.max(x0, x1)); x++) {
      for (let y = lo(Math.min(y0, y1)); y <= lo(Math.max(y0, y1)); y++) {
        this.cells[x * this.resolution + y] = value ? 1 : 0;
      }
    }
  }

  clear(): void {
    this.cells.fill(0);
  }

  count(): number {
    let n = 0;
    for (let i = 0; i < this.cells.length; i++) if (this.cells[i]) n++;
    return n;
  }

  occupiedCells(): Array<[number, number]> {
    const out: Array<[number, number]> = [];
    for (let x = 0; x < this.resolution; x++) {
      for (let y = 0; y < this.resolution; y++) {
        if (this.cells[x * this.resolution + y]) out.push([x, y]);
      }
    }
    return out;
  }

  toBase64(): string {
    return bytesToBase64(this.cells);
  }

  static fromBase64(raw: string, resolution: number): PlanModel {
    const bytes = base64ToBytes(raw);
    if (bytes.length !== resolution * resolution) {
      throw new Error(
        `plan must be ${resolution}x${resolution} = ${resolution * resolution} bytes, ` +
          `got ${bytes.length}`,
      );
    }
    // normalise to 0/1 so equality checks are value-insensitive
    const cells = new Uint8Array(bytes.length);
    for (let i = 0; i < bytes.length; i++) cells[i] = bytes[i] ? 1 : 0;
    return new PlanModel(resolution, cells);
  }

  equals(other: PlanModel): boolean {
    if (other.resolution !== this.resolution) return false;
    for (let i = 0; i < this.cells.length; i++) {
      if ((this.cells[i] !== 0) !== (other.cells[i] !== 0)) return false;
    }
    return true;
  }

  private check(x: number, y: number): void {
    if (x < 0 || y < 0 || x >= this.resolution || y >= this.resolution) {
      throw new RangeError(`cell (${x}, ${y}) outside ${this.resolution}^2 plan`);
    }
  }
}

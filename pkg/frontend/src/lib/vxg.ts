/**
 * Binary voxel grid codec (VXG1).
 *
 * Layout: 24-byte little-endian header — 4-byte magic "VXG1", uint32
 * resolution, float32 voxel size, 3x float32 origin — followed by the
 * occupancy bits packed LSB-first in x-fastest flat order
 * (i = x + y*R + z*R^2).
 */

export const VXG1_MAGIC = "VXG1";
export const HEADER_BYTES = 24;

export class GridFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "GridFormatError";
  }
}

export interface VoxelGrid {
  resolution: number;
  voxelSize: number;
  origin: [number, number, number];
  /** Flat occupancy, length R^3, values 0/1, x-fastest. */
  occupancy: Uint8Array;
}

export function emptyGrid(resolution: number, voxelSize = 0.75): VoxelGrid {
  return {
    resolution,
    voxelSize,
    origin: [0, 0, 0],
    occupancy: new Uint8Array(resolution ** 3),
  };
}

export function flatIndex(resolution: number, x: number, y: number, z: number): number {
  return x + y * resolution + z * resolution * resolution;
}

export function getVoxel(grid: VoxelGrid, x: number, y: number, z: number): number {
  return grid.occupancy[flatIndex(grid.resolution, x, y, z)];
}

export function setVoxel(grid: VoxelGrid, x: number, y: number, z: number, value = 1): void {
  grid.occupancy[flatIndex(grid.resolution, x, y, z)] = value ? 1 : 0;
}

export function countVoxels(grid: VoxelGrid): number {
  let n = 0;
  for (let i = 0; i < grid.occupancy.length; i++) n += grid.occupancy[i];
  return n;
}

export function dumpVxg1(grid: VoxelGrid): Uint8Array {
  const n = grid.resolution ** 3;
  if (grid.occupancy.length !== n) {
    throw new GridFormatError(`occupancy length ${grid.occupancy.length} != ${n}`);
  }
  const payloadBytes = Math.ceil(n / 8);
  const out = new Uint8Array(HEADER_BYTES + payloadBytes);
  const view = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) out[i] = VXG1_MAGIC.charCodeAt(i);
  view.setUint32(4, grid.resolution, true);
  view.setFloat32(8, grid.voxelSize, true);
  view.setFloat32(12, grid.origin[0], true);
  view.setFloat32(16, grid.origin[1], true);
  view.setFloat32(20, grid.origin[2], true);
  for (let i = 0; i < n; i++) {
    if (grid.occupancy[i]) out[HEADER_BYTES + (i >> 3)] |= 1 << (i & 7);
  }
  return out;
}

export function parseVxg1(data: Uint8Array | ArrayBuffer): VoxelGrid {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  if (bytes.length < HEADER_BYTES) {
    throw new GridFormatError("truncated header");
  }
  const magic = String.fromCharCode(bytes[0], bytes[1], bytes[2], bytes[3]);
  if (magic !== VXG1_MAGIC) {
    throw new GridFormatError(`bad magic ${JSON.stringify(magic)}`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const resolution = view.getUint32(4, true);
  if (resolution === 0) {
    throw new GridFormatError("zero resolution");
  }
  const voxelSize = view.getFloat32(8, true);
  const origin: [number, number, number] = [
    view.getFloat32(12, true),
    view.getFloat32(16, true),
    view.getFloat32(20, true),
  ];
  const n = resolution ** 3;
  const need = Math.ceil(n / 8);
  if (bytes.length - HEADER_BYTES < need) {
    throw new GridFormatError(
      `truncated payload: got ${bytes.length - HEADER_BYTES} bytes, need ${need}`,
    );
  }
  const occupancy = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    occupancy[i] = (bytes[HEADER_BYTES + (i >> 3)] >> (i & 7)) & 1;
  }
  return { resolution, voxelSize, origin, occupancy };
}

/**
 * Instance extraction for the voxel viewer.
 *
 * Grids render as one instanced cube mesh (a single draw call regardless of
 * voxel count). Positions are normalised to a unit cube centred at the
 * origin, with the grid's vertical axis (z) mapped to scene-up (y).
 */

import { countVoxels, type VoxelGrid } from "./vxg";

export interface InstanceSet {
  resolution: number;
  count: number;
  /** xyz scene position per instance, length 3*count. */
  positions: Float32Array;
  /** rgb per instance, length 3*count. */
  colors: Float32Array;
  /** Edge length of one cube in scene units. */
  cubeSize: number;
}

/** True when the voxel is occupied and touches air or the grid border. */
export function isSurface(grid: VoxelGrid, x: number, y: number, z: number): boolean {
  const r = grid.resolution;
  const occ = grid.occupancy;
  const at = (xx: number, yy: number, zz: number) => occ[xx + yy * r + zz * r * r];
  if (!at(x, y, z)) return false;
  if (x === 0 || y === 0 || z === 0 || x === r - 1 || y === r - 1 || z === r - 1) return true;
  return !(
    at(x - 1, y, z) &&
    at(x + 1, y, z) &&
    at(x, y - 1, z) &&
    at(x, y + 1, z) &&
    at(x, y, z - 1) &&
    at(x, y, z + 1)
  );
}

// height ramp: deep blue floor -> warm roof
function heightColor(t: number): [number, number, number] {
  return [0.25 + 0.65 * t, 0.45 + 0.25 * t, 0.85 - 0.55 * t];
}

export interface ExtractOptions {
  /** Drop fully enclosed voxels; rendering is identical, instances far fewer. */
  surfaceOnly?: boolean;
}

export function extractInstances(grid: VoxelGrid, options: ExtractOptions = {}): InstanceSet {
  const surfaceOnly = options.surfaceOnly ?? true;
  const r = grid.resolution;
  const occ = grid.occupancy;
  const capacity = countVoxels(grid);
  const positions = new Float32Array(capacity * 3);
  const colors = new Float32Array(capacity * 3);
  const cubeSize = 1 / r;
  let count = 0;
  let i = 0;
  for (let z = 0; z < r; z++) {
    const t = r > 1 ? z / (r - 1) : 0;
    const [cr, cg, cb] = heightColor(t);
    for (let y = 0; y < r; y++) {
      for (let x = 0; x < r; x++, i++) {
        if (!occ[i]) continue;
        if (surfaceOnly && !isSurface(grid, x, y, z)) continue;
        // grid (x, y, z) -> scene (x, up=z, y), unit cube centred on origin
        positions[count * 3] = (x + 0.5) * cubeSize - 0.5;
        positions[count * 3 + 1] = (z + 0.5) * cubeSize - 0.5;
        positions[count * 3 + 2] = (y + 0.5) * cubeSize - 0.5;
        colors[count * 3] = cr;
        colors[count * 3 + 1] = cg;
        colors[count * 3 + 2] = cb;
        count++;
      }
    }
  }
  return {
    resolution: r,
    count,
    positions: positions.subarray(0, count * 3),
    colors: colors.subarray(0, count * 3),
    cubeSize,
  };
}

import * as THREE from "three";
import { describe, expect, it } from "vitest";

import { OrbitState } from "../src/lib/orbit";
import { extractInstances, isSurface } from "../src/lib/voxmesh";
import { countVoxels, emptyGrid, setVoxel } from "../src/lib/vxg";
import { applyOrbit, buildScene, buildVoxelMesh, FrameMeter } from "../src/ui/scene";

function solidCube(resolution: number) {
  const grid = emptyGrid(resolution);
  grid.occupancy.fill(1);
  return grid;
}

/** Exactly `count` occupied voxels, spread by a seeded shuffle. */
function scatteredGrid(resolution: number, count: number, seed: number) {
  const n = resolution ** 3;
  const order = new Uint32Array(n);
  for (let i = 0; i < n; i++) order[i] = i;
  let state = seed >>> 0 || 1;
  for (let i = n - 1; i > 0; i--) {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    const j = state % (i + 1);
    const tmp = order[i];
    order[i] = order[j];
    order[j] = tmp;
  }
  const grid = emptyGrid(resolution);
  for (let i = 0; i < count; i++) grid.occupancy[order[i]] = 1;
  return grid;
}

describe("surface detection", () => {
  it("keeps only the shell of a solid cube", () => {
    const grid = solidCube(6);
    const instances = extractInstances(grid, { surfaceOnly: true });
    expect(instances.count).toBe(6 ** 3 - 4 ** 3);
    expect(isSurface(grid, 0, 0, 0)).toBe(true);
    expect(isSurface(grid, 3, 3, 3)).toBe(false);
  });

  it("treats empty voxels as non-surface", () => {
    const grid = emptyGrid(4);
    expect(isSurface(grid, 1, 1, 1)).toBe(false);
  });

  it("keeps every voxel when surfaceOnly is off", () => {
    const grid = scatteredGrid(16, 500, 3);
    expect(extractInstances(grid, { surfaceOnly: false }).count).toBe(500);
  });
});

describe("instance extraction", () => {
  it("centres positions in the unit cube with z mapped up", () => {
    const grid = emptyGrid(4);
    setVoxel(grid, 0, 0, 0);
    setVoxel(grid, 3, 1, 2);
    const { positions, count, cubeSize } = extractInstances(grid);
    expect(count).toBe(2);
    expect(cubeSize).toBeCloseTo(0.25, 6);
    // first instance: grid (0,0,0) -> scene (-0.375, -0.375, -0.375)
    expect(positions[0]).toBeCloseTo(-0.375, 6);
    expect(positions[1]).toBeCloseTo(-0.375, 6);
    expect(positions[2]).toBeCloseTo(-0.375, 6);
    // second: grid (3,1,2) -> scene x=0.375, up=(2+0.5)/4-0.5, depth=(1+0.5)/4-0.5
    expect(positions[3]).toBeCloseTo(0.375, 6);
    expect(positions[4]).toBeCloseTo(0.125, 6);
    expect(positions[5]).toBeCloseTo(-0.125, 6);
  });

  it("assigns a colour per instance graded by height", () => {
    const grid = emptyGrid(8);
    setVoxel(grid, 0, 0, 0);
    setVoxel(grid, 0, 0, 7);
    const { colors } = extractInstances(grid);
    expect(colors.length).toBe(6);
    expect(colors[0]).not.toBeCloseTo(colors[3], 3); // floor vs roof red channel
  });
});

describe("viewer scene", () => {
  it("renders a whole grid as a single instanced mesh", () => {
    const { scene, mesh } = buildScene(extractInstances(scatteredGrid(16, 800, 5)));
    const instanced = scene.children.filter((c) => c instanceof THREE.InstancedMesh);
    expect(instanced).toEqual([mesh]);
    expect(mesh.count).toBe(extractInstances(scatteredGrid(16, 800, 5)).count);
  });

  it("orbit update repositions the camera and faces the target", () => {
    const camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    const orbit = new OrbitState(0, 0, 2);
    applyOrbit(camera, orbit);
    expect(camera.position.z).toBeCloseTo(2, 6);
    const forward = new THREE.Vector3();
    camera.getWorldDirection(forward);
    expect(forward.z).toBeCloseTo(-1, 6);
  });
});

describe("interactivity budget with 10k voxels at 64^3", () => {
  it("builds the scene quickly and keeps per-frame work far under 33 ms", () => {
    const grid = scatteredGrid(64, 10_000, 11);
    expect(countVoxels(grid)).toBe(10_000);

    const t0 = performance.now();
    const instances = extractInstances(grid, { surfaceOnly: false });
    const mesh = buildVoxelMesh(instances);
    const buildMs = performance.now() - t0;
    expect(instances.count).toBe(10_000);
    expect(mesh.count).toBe(10_000);
    expect(buildMs).toBeLessThan(500); // one-off cost on model load

    // steady state: the only per-frame CPU work is the orbit-camera update,
    // because instance buffers are static and drawn in a single call
    const camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    const orbit = new OrbitState();
    const meter = new FrameMeter();
    const frames = 300;
    const start = performance.now();
    for (let f = 0; f < frames; f++) {
      orbit.rotate(0.01, 0.002);
      applyOrbit(camera, orbit);
      meter.tick(performance.now());
    }
    const perFrameMs = (performance.now() - start) / frames;
    expect(perFrameMs).toBeLessThan(8); // 33 ms budget with 4x headroom
    expect(meter.fps).toBeGreaterThan(30);
  });
});

describe("frame meter", () => {
  it("averages frame intervals into fps", () => {
    const meter = new FrameMeter();
    for (let t = 0; t <= 1000; t += 20) meter.tick(t);
    expect(meter.fps).toBeGreaterThan(45);
    expect(meter.fps).toBeLessThan(55);
  });
});

/**
 * Scene-graph construction for the voxel viewer.
 *
 * Kept free of any renderer/DOM dependency: everything here runs headless,
 * which is also what keeps the per-frame cost testable. A whole grid becomes
 * one InstancedMesh (one draw call); per-frame work is only the orbit-camera
 * update.
 */

import * as THREE from "three";

import type { OrbitState } from "../lib/orbit";
import type { InstanceSet } from "../lib/voxmesh";

export function buildVoxelMesh(instances: InstanceSet): THREE.InstancedMesh {
  const geometry = new THREE.BoxGeometry(
    instances.cubeSize,
    instances.cubeSize,
    instances.cubeSize,
  );
  const material = new THREE.MeshLambertMaterial();
  const mesh = new THREE.InstancedMesh(geometry, material, Math.max(instances.count, 1));
  mesh.count = instances.count;
  const matrix = new THREE.Matrix4();
  const color = new THREE.Color();
  for (let i = 0; i < instances.count; i++) {
    matrix.setPosition(
      instances.positions[i * 3],
      instances.positions[i * 3 + 1],
      instances.positions[i * 3 + 2],
    );
    mesh.setMatrixAt(i, matrix);
    color.setRGB(
      instances.colors[i * 3],
      instances.colors[i * 3 + 1],
      instances.colors[i * 3 + 2],
    );
    mesh.setColorAt(i, color);
  }
  mesh.instanceMatrix.needsUpdate = true;
  if (mesh.instanceColor) mesh.instanceColor.needsUpdate = true;
  return mesh;
}

export interface VoxelScene {
  scene: THREE.Scene;
  mesh: THREE.InstancedMesh;
}

export function buildScene(instances: InstanceSet): VoxelScene {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x10141c);
  scene.add(new THREE.AmbientLight(0xffffff, 0.55));
  const sun = new THREE.DirectionalLight(0xffffff, 1.6);
  sun.position.set(2, 3, 1.5);
  scene.add(sun);
  const ground = new THREE.GridHelper(1.4, 14, 0x2e3a52, 0x1d2636);
  ground.position.y = -0.52;
  scene.add(ground);
  const mesh = buildVoxelMesh(instances);
  scene.add(mesh);
  return { scene, mesh };
}

/** Move the camera onto the orbit sphere and face the target. O(1) per frame. */
export function applyOrbit(camera: THREE.PerspectiveCamera, orbit: OrbitState): void {
  const [x, y, z] = orbit.position();
  camera.position.set(x, y, z);
  camera.lookAt(orbit.target[0], orbit.target[1], orbit.target[2]);
  camera.updateMatrixWorld();
}

/** Exponential moving average over frame intervals. */
export class FrameMeter {
  private last: number | null = null;
  private average = 0;

  tick(nowMs: number): void {
    if (this.last !== null) {
      const dt = nowMs - this.last;
      this.average = this.average === 0 ? dt : this.average * 0.9 + dt * 0.1;
    }
    this.last = nowMs;
  }

  get fps(): number {
    return this.average > 0 ? 1000 / this.average : 0;
  }
}

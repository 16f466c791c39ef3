/** Interactive WebGL voxel viewer: instanced cubes plus orbit controls. */

import * as THREE from "three";

import { OrbitState } from "../lib/orbit";
import { extractInstances } from "../lib/voxmesh";
import type { VoxelGrid } from "../lib/vxg";
import { countVoxels } from "../lib/vxg";
import { applyOrbit, buildScene, FrameMeter } from "./scene";

export class VoxelViewer {
  readonly orbit = new OrbitState();
  private readonly renderer: THREE.WebGLRenderer;
  private readonly camera: THREE.PerspectiveCamera;
  private readonly meter = new FrameMeter();
  private scene: THREE.Scene;
  private mesh: THREE.InstancedMesh | null = null;
  private raf = 0;
  private readonly host: HTMLElement;
  private readonly hud: HTMLElement;

  constructor(host: HTMLElement) {
    this.host = host;
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    host.appendChild(this.renderer.domElement);
    this.hud = document.createElement("div");
    this.hud.className = "viewer-hud";
    this.hud.textContent = "no model loaded";
    host.appendChild(this.hud);
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    this.scene = buildScene({
      resolution: 1,
      count: 0,
      positions: new Float32Array(0),
      colors: new Float32Array(0),
      cubeSize: 1,
    }).scene;
    this.bindPointer();
    this.resize();
    window.addEventListener("resize", () => this.resize());
    const loop = (now: number) => {
      this.meter.tick(now);
      applyOrbit(this.camera, this.orbit);
      this.renderer.render(this.scene, this.camera);
      this.updateHud();
      this.raf = requestAnimationFrame(loop);
    };
    this.raf = requestAnimationFrame(loop);
  }

  private label = "";
  private instanceCount = 0;

  setGrid(grid: VoxelGrid, label = ""): void {
    const instances = extractInstances(grid, { surfaceOnly: true });
    const built = buildScene(instances);
    this.disposeMesh();
    this.scene = built.scene;
    this.mesh = built.mesh;
    this.label = label || `${grid.resolution}^3`;
    this.instanceCount = instances.count;
    this.hud.title = `${countVoxels(grid)} voxels, ${instances.count} surface instances`;
  }

  private disposeMesh(): void {
    if (!this.mesh) return;
    this.mesh.geometry.dispose();
    (this.mesh.material as THREE.Material).dispose();
    this.mesh.dispose();
    this.mesh = null;
  }

  private updateHud(): void {
    const fps = this.meter.fps;
    this.hud.textContent = this.mesh
      ? `${this.label} | ${this.instanceCount} cubes | ${fps.toFixed(0)} fps`
      : "no model loaded";
  }

  private bindPointer(): void {
    const el = this.renderer.domElement;
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    el.addEventListener("pointerdown", (ev) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
      el.setPointerCapture(ev.pointerId);
    });
    el.addEventListener("pointermove", (ev) => {
      if (!dragging) return;
      this.orbit.rotate((ev.clientX - lastX) * 0.008, (ev.clientY - lastY) * 0.008);
      lastX = ev.clientX;
      lastY = ev.clientY;
    });
    el.addEventListener("pointerup", () => {
      dragging = false;
    });
    el.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.orbit.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
    });
  }

  private resize(): void {
    const w = this.host.clientWidth || 640;
    const h = this.host.clientHeight || 480;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  dispose(): void {
    cancelAnimationFrame(this.raf);
    this.disposeMesh();
    this.renderer.dispose();
  }
}

export function fitViewerStyles(canvas: HTMLCanvasElement): void {
  canvas.style.width = "100%";
  canvas.style.height = "100%";
  canvas.style.display = "block";
}

/** Canvas widget for drawing occupancy plans cell by cell. */

import { PlanModel } from "../lib/plan";

/** Map a pointer position inside the canvas rect to plan cell coordinates. */
export function pointerToCell(
  rect: { left: number; top: number; width: number; height: number },
  resolution: number,
  clientX: number,
  clientY: number,
): [number, number] | null {
  const fx = (clientX - rect.left) / rect.width;
  const fy = (clientY - rect.top) / rect.height;
  if (fx < 0 || fy < 0 || fx >= 1 || fy >= 1) return null;
  // canvas rows run top-down while plan y grows upward
  const x = Math.floor(fx * resolution);
  const y = resolution - 1 - Math.floor(fy * resolution);
  return [x, y];
}

export class PlanEditor {
  plan: PlanModel;
  onChange: (() => void) | null = null;
  private readonly canvas: HTMLCanvasElement;
  private drawValue = 1;

  constructor(canvas: HTMLCanvasElement, resolution: number) {
    this.canvas = canvas;
    this.plan = new PlanModel(resolution);
    let painting = false;
    canvas.addEventListener("pointerdown", (ev) => {
      painting = true;
      this.drawValue = ev.buttons === 2 || ev.shiftKey ? 0 : 1;
      this.paintAt(ev.clientX, ev.clientY);
      canvas.setPointerCapture(ev.pointerId);
      ev.preventDefault();
    });
    canvas.addEventListener("pointermove", (ev) => {
      if (painting) this.paintAt(ev.clientX, ev.clientY);
    });
    canvas.addEventListener("pointerup", () => {
      painting = false;
    });
    canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
    this.render();
  }

  setResolution(resolution: number): void {
    if (resolution === this.plan.resolution) return;
    this.plan = new PlanModel(resolution);
    this.render();
    this.onChange?.();
  }

  clear(): void {
    this.plan.clear();
    this.render();
    this.onChange?.();
  }

  private paintAt(clientX: number, clientY: number): void {
    const cell = pointerToCell(
      this.canvas.getBoundingClientRect(),
      this.plan.resolution,
      clientX,
      clientY,
    );
    if (!cell) return;
    if (this.plan.get(cell[0], cell[1]) === this.drawValue) return;
    this.plan.set(cell[0], cell[1], this.drawValue);
    this.render();
    this.onChange?.();
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const r = this.plan.resolution;
    const size = this.canvas.width;
    const cell = size / r;
    ctx.fillStyle = "#0e1118";
    ctx.fillRect(0, 0, size, size);
    ctx.fillStyle = "#7fd0ff";
    for (const [x, y] of this.plan.occupiedCells()) {
      ctx.fillRect(x * cell, (r - 1 - y) * cell, Math.ceil(cell), Math.ceil(cell));
    }
    ctx.strokeStyle = "rgba(128, 150, 190, 0.18)";
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (let i = 1; i < r; i++) {
      ctx.moveTo(i * cell, 0);
      ctx.lineTo(i * cell, size);
      ctx.moveTo(0, i * cell);
      ctx.lineTo(size, i * cell);
    }
    ctx.stroke();
  }
}

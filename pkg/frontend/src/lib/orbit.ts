/** Orbit camera state: spherical coordinates around a target point. */

const MIN_PITCH = -Math.PI / 2 + 0.01;
const MAX_PITCH = Math.PI / 2 - 0.01;

export class OrbitState {
  yaw: number;
  pitch: number;
  distance: number;
  target: [number, number, number];
  minDistance = 0.2;
  maxDistance = 20;

  constructor(yaw = Math.PI / 4, pitch = Math.PI / 6, distance = 2.2) {
    this.yaw = yaw;
    this.pitch = pitch;
    this.distance = distance;
    this.target = [0, 0, 0];
  }

  rotate(deltaYaw: number, deltaPitch: number): void {
    this.yaw = (this.yaw + deltaYaw) % (Math.PI * 2);
    this.pitch = Math.min(MAX_PITCH, Math.max(MIN_PITCH, this.pitch + deltaPitch));
  }

  zoom(factor: number): void {
    if (!(factor > 0)) throw new RangeError(`zoom factor must be positive, got ${factor}`);
    this.distance = Math.min(this.maxDistance, Math.max(this.minDistance, this.distance * factor));
  }

  /** Camera position on the orbit sphere. */
  position(): [number, number, number] {
    const cp = Math.cos(this.pitch);
    return [
      this.target[0] + this.distance * cp * Math.sin(this.yaw),
      this.target[1] + this.distance * Math.sin(this.pitch),
      this.target[2] + this.distance * cp * Math.cos(this.yaw),
    ];
  }
}

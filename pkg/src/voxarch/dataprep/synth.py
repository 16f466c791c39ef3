"""Procedural synthetic houses for corpus bootstrapping and tests.

Each house is generated twice over: directly as a voxel grid and as a labelled
box mesh whose filtered voxelization reproduces the grid exactly. Every
archetype is chosen so the grid is already a clean-up fixpoint: wall slots run
full story height, stair steps expose at most three differing faces, columns
are exactly the protected axis pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import VoxelGrid, clean_up
from .mesh import HouseMesh, cuboid_mesh, merge_meshes

OCCUPANCY_RANGE = (0.02, 0.35)


@dataclass
class SynthHouse:
    grid: VoxelGrid  # filtered occupancy: structure without door/window/ground
    mesh: HouseMesh  # full mesh including door, window and ground elements
    seed: int


class _Builder:
    def __init__(self, resolution: int, voxel_size: float):
        self.r = resolution
        self.vs = voxel_size
        self.occ = np.zeros((resolution,) * 3, dtype=np.uint8)
        self.boxes = []  # (label, lo, hi) in voxel units, half open

    def add(self, label: str, lo, hi, rasterize: bool = True):
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        if (hi <= lo).any() or (lo < 0).any() or (hi > self.r).any():
            raise ValueError(f"box out of bounds: {label} {lo} {hi}")
        self.boxes.append((label, lo, hi))
        if rasterize:
            self.occ[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = 1

    def cut(self, lo, hi):
        self.occ[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = 0

    def mesh(self) -> HouseMesh:
        parts = []
        for eid, (label, lo, hi) in enumerate(self.boxes):
            parts.append(cuboid_mesh(lo * self.vs, hi * self.vs, label, eid))
        return merge_meshes(parts)


def _place_slots(rng, lo: int, hi: int, max_slots: int = 2):
    """Pick non-touching full-height slot spans inside [lo, hi) wall columns."""
    slots = []
    want = int(rng.integers(1, max_slots + 1))
    for _ in range(8 * want):
        if len(slots) >= want:
            break
        width = int(rng.integers(1, 3))
        left, right = lo + 2, hi - 2 - width
        if right < left:
            continue
        s = int(rng.integers(left, right + 1))
        if all(s + width + 1 < a or s > a + w + 1 for a, w in slots):
            slots.append((s, width))
    return sorted(slots)


def _wall_with_slots(b: _Builder, rng, axis: int, row: int, lo: int, hi: int,
                     zlo: int, zhi: int, slot_label: str):
    """One straight wall along ``axis`` with full-height slots cut out.

    Returns the slot spans so callers can steer clear of them.
    """
    def box(a0, a1):
        if axis == 0:
            return (a0, row, zlo), (a1, row + 1, zhi)
        return (row, a0, zlo), (row + 1, a1, zhi)

    slots = _place_slots(rng, lo, hi)
    prev = lo
    for s, w in slots:
        if s > prev:
            b.add("wall", *box(prev, s))
        b.add(slot_label, *box(s, s + w), rasterize=False)
        prev = s + w
    if hi > prev:
        b.add("wall", *box(prev, hi))
    return slots


def _free(occ_reserved: np.ndarray, lo, hi) -> bool:
    return not occ_reserved[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]].any()


def _reserve(occ_reserved: np.ndarray, lo, hi, pad: int = 1):
    r = occ_reserved.shape[0]
    lo = np.maximum(np.asarray(lo) - pad, 0)
    hi = np.minimum(np.asarray(hi) + pad, r)
    occ_reserved[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True


def _build(rng: np.random.Generator, resolution: int, extent: float):
    r = resolution
    b = _Builder(r, extent / r)
    margin = max(2, r // 10)
    min_fp = max(10, r // 2)
    max_fp = min(int(r * 0.72), r - 2 * margin)
    if max_fp < min_fp:
        return None

    w = int(rng.integers(min_fp, max_fp + 1))
    d = int(rng.integers(min_fp, max_fp + 1))
    x0 = int(rng.integers(margin, r - margin - w + 1))
    y0 = int(rng.integers(margin, r - margin - d + 1))
    x1, y1 = x0 + w, y0 + d

    story_h = int(rng.integers(4, 7))
    pitch = story_h + 1
    z0 = 1
    ns_max = (r - 2 - z0) // pitch
    if ns_max < 2:
        return None
    ns = int(rng.integers(2, min(ns_max, 4) + 1))

    b.add("ground", (0, 0, 0), (r, r, 1), rasterize=False)
    for k in range(ns + 1):
        zs = z0 + k * pitch
        b.add("roof" if k == ns else "floor", (x0, y0, zs), (x1, y1, zs + 1))

    reserved = np.zeros((r,) * 3, dtype=bool)
    stair_count = 0
    slot_cols = {0: set(), 1: set()}  # slot positions on walls along each axis

    for k in range(ns):
        zlo = z0 + k * pitch + 1
        zhi = z0 + (k + 1) * pitch
        slot_label = "door" if k == 0 else "window"
        for row, lo, hi, axis in ((y0, x0, x1, 0), (y1 - 1, x0, x1, 0),
                                  (x0, y0, y1, 1), (x1 - 1, y0, y1, 1)):
            for s, sw in _wall_with_slots(b, rng, axis, row, lo, hi, zlo, zhi, slot_label):
                slot_cols[axis].update(range(s, s + sw))

        # stair run: steps of depth 1 and width 2 rising one voxel each
        if x1 - 2 - story_h > x0 + 2 and y1 - 4 > y0 + 2:
            sx = int(rng.integers(x0 + 2, x1 - 2 - story_h))
            sy = int(rng.integers(y0 + 2, y1 - 4))
            for s in range(story_h):
                b.add("stair", (sx + s, sy, zlo), (sx + s + 1, sy + 2, zlo + s + 1))
            _reserve(reserved, (sx, sy, zlo), (sx + story_h, sy + 2, zhi))
            stair_count += 1

        for _ in range(int(rng.integers(1, 4))):  # protected 1x1 columns
            px = int(rng.integers(x0 + 2, x1 - 2))
            py = int(rng.integers(y0 + 2, y1 - 2))
            lo, hi = (px, py, zlo), (px + 1, py + 1, zhi)
            if _free(reserved, lo, hi):
                b.add("wall", lo, hi)
                _reserve(reserved, lo, hi)

        for _ in range(int(rng.integers(0, 3))):  # furniture blocks on the slab
            fw = int(rng.integers(2, 4))
            fd = int(rng.integers(2, 4))
            fh = int(rng.integers(1, 3))
            fx = int(rng.integers(x0 + 2, x1 - 1 - fw))
            fy = int(rng.integers(y0 + 2, y1 - 1 - fd))
            lo, hi = (fx, fy, zlo), (fx + fw, fy + fd, zlo + fh)
            if _free(reserved, lo, hi):
                b.add("furniture", lo, hi)
                _reserve(reserved, lo, hi)

        for _ in range(int(rng.integers(1, 3))):  # interior partitions
            run_axis = int(rng.integers(0, 2))  # axis the partition runs along
            row_lo, row_hi = (x0, x1) if run_axis == 1 else (y0, y1)
            span_lo, span_hi = (y0, y1) if run_axis == 1 else (x0, x1)
            for _try in range(12):
                c = int(rng.integers(row_lo + 3, row_hi - 3))
                if c in slot_cols[1 - run_axis]:  # would plug a perimeter slot
                    continue
                lo = (c, span_lo, zlo) if run_axis == 1 else (span_lo, c, zlo)
                hi = (c + 1, span_hi, zhi) if run_axis == 1 else (span_hi, c + 1, zhi)
                if not _free(reserved, lo, hi):
                    continue
                slots = _wall_with_slots(b, rng, run_axis, c, span_lo, span_hi,
                                         zlo, zhi, "door")
                for s, sw in slots:
                    slot_cols[run_axis].update(range(s, s + sw))
                _reserve(reserved, lo, hi, pad=1)
                break

    frac = float(b.occ.mean())
    if not OCCUPANCY_RANGE[0] <= frac <= OCCUPANCY_RANGE[1]:
        return None
    if stair_count == 0:
        return None
    grid = VoxelGrid(b.occ.copy(), voxel_size=b.vs)
    if not np.array_equal(clean_up(grid, iterations=1).occupancy, b.occ):
        return None
    return grid, b.mesh()


def synth_house(seed: int = 0, resolution: int = 64, extent: float = 48.0) -> SynthHouse:
    """Deterministic procedural house. Same seed, same house."""
    for attempt in range(16):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=[seed, attempt]))
        built = _build(rng, resolution, extent)
        if built is not None:
            grid, mesh = built
            return SynthHouse(grid=grid, mesh=mesh, seed=seed)
    raise RuntimeError(f"could not build a valid house for seed {seed}")


def synth_corpus(n: int, seed: int = 0, resolution: int = 64, extent: float = 48.0):
    return [synth_house(seed + i, resolution=resolution, extent=extent) for i in range(n)]

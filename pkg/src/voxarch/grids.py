"""Dense cubic voxel grids and the deterministic algorithms that operate on them.

Grids are plain numpy arrays indexed ``[x, y, z]``. The canonical flat ordering
(used on disk and for token rasterisation) is x-fastest, then y, then z, i.e.
flat index ``i = x + y*R + z*R**2``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

PIPELINE_RESOLUTIONS = (8, 16, 32, 64, 128, 256, 512)

VXG1_MAGIC = b"VXG1"
VXF1_MAGIC = b"VXF1"
_HEADER = struct.Struct("<4sIf3f")  # magic, resolution, voxel_size, origin


class GridFormatError(ValueError):
    """Raised for malformed on-disk grid payloads."""


@dataclass
class VoxelGrid:
    """Binary occupancy over a cubic lattice with a physical placement.

    ``occupancy`` is a uint8 array of shape (R, R, R), values in {0, 1}.
    ``voxel_size`` is the edge length of one voxel in meters; the grid spans
    ``resolution * voxel_size`` meters per axis starting at ``origin``.
    """

    occupancy: np.ndarray
    voxel_size: float = 0.75
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.float32))

    def __post_init__(self):
        self.occupancy = np.ascontiguousarray(self.occupancy, dtype=np.uint8)
        if self.occupancy.ndim != 3 or len(set(self.occupancy.shape)) != 1:
            raise ValueError(f"occupancy must be cubic, got shape {self.occupancy.shape}")
        self.origin = np.asarray(self.origin, dtype=np.float32).reshape(3)
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be positive")

    @property
    def resolution(self) -> int:
        return self.occupancy.shape[0]

    @property
    def extent(self) -> float:
        """Physical edge length in meters."""
        return self.resolution * self.voxel_size

    def count(self) -> int:
        return int(self.occupancy.sum())

    @classmethod
    def empty(cls, resolution, voxel_size=0.75, origin=(0.0, 0.0, 0.0)):
        return cls(np.zeros((resolution,) * 3, dtype=np.uint8), voxel_size, np.asarray(origin))


@dataclass
class OccupancyField:
    """Like :class:`VoxelGrid` but carries real-valued occupancy in [0, 1]."""

    values: np.ndarray
    voxel_size: float = 0.75
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.float32))

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 3 or len(set(self.values.shape)) != 1:
            raise ValueError(f"values must be cubic, got shape {self.values.shape}")
        self.origin = np.asarray(self.origin, dtype=np.float32).reshape(3)

    @property
    def resolution(self) -> int:
        return self.values.shape[0]


@dataclass
class VariationScores:
    """Per-voxel counts of face-adjacent neighbours with differing occupancy.

    ``total = axis_x + axis_y + axis_z``; each axiswise score is in {0, 1, 2}.
    Out-of-grid neighbours contribute nothing.
    """

    axis_x: np.ndarray
    axis_y: np.ndarray
    axis_z: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.axis_x + self.axis_y + self.axis_z


def variation_contribution(grid) -> VariationScores:
    """Count, per voxel and per axis, how many in-grid face neighbours differ."""
    occ = grid.occupancy if isinstance(grid, VoxelGrid) else np.asarray(grid, dtype=np.uint8)
    scores = []
    for axis in range(3):
        diff = np.abs(np.diff(occ.astype(np.int16), axis=axis)).astype(np.uint8)
        acc = np.zeros_like(occ)
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        acc[tuple(lo)] += diff
        acc[tuple(hi)] += diff
        scores.append(acc)
    return VariationScores(*scores)


def clean_up(grid: VoxelGrid, iterations: int = 32) -> VoxelGrid:
    """Iteratively strip noisy occupied voxels (high neighbour variation).

    Each pass recomputes variation scores and removes occupied voxels with a
    total score of 4, 5 or 6, keeping score-4 voxels whose axiswise scores are
    exactly {0, 2, 2} (thin structures such as columns). Void voxels are never
    touched, so output occupancy is always a subset of the input.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    occ = grid.occupancy.copy()
    for _ in range(iterations):
        v = variation_contribution(occ)
        total = v.total
        noisy = (total >= 4) & (total <= 6)
        # thin-structure exception: axiswise multiset exactly {0, 2, 2}
        two_twos = ((v.axis_x == 2).astype(np.uint8)
                    + (v.axis_y == 2).astype(np.uint8)
                    + (v.axis_z == 2).astype(np.uint8)) == 2
        protected = (total == 4) & two_twos
        remove = noisy & ~protected & (occ == 1)
        if not remove.any():
            break  # fixpoint; further passes are no-ops
        occ[remove] = 0
    return VoxelGrid(occ, grid.voxel_size, grid.origin)


def project_2_5d(grid):
    """Average a grid along each axis onto the three orthogonal planes.

    Returns ``(map_xy, map_yz, map_xz)``: map_xy[a, b] is the mean of the
    z-column at (x=a, y=b), map_yz averages over x, map_xz over y. For binary
    input each map value is k/R, and sum(map) * R equals the occupied count.
    """
    values = grid.occupancy if isinstance(grid, VoxelGrid) else grid.values
    v = values.astype(np.float64)
    return v.mean(axis=2), v.mean(axis=0), v.mean(axis=1)


def subdivide(grid: VoxelGrid, factor: int = 2) -> VoxelGrid:
    """Replicate every voxel into its ``factor**3`` children (nearest neighbour)."""
    occ = grid.occupancy
    for axis in range(3):
        occ = np.repeat(occ, factor, axis=axis)
    return VoxelGrid(occ, grid.voxel_size / factor, grid.origin)


def subdivide_field(values: np.ndarray, factor: int = 2) -> np.ndarray:
    """Nearest-neighbour upsampling of a raw cubic array."""
    out = values
    for axis in range(3):
        out = np.repeat(out, factor, axis=axis)
    return out


def binarize(fld, threshold: float = 0.5) -> VoxelGrid:
    """Threshold an occupancy field: occupied iff value >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0,1), got {threshold}")
    if isinstance(fld, VoxelGrid):  # already binary; thresholding is idempotent
        fld = OccupancyField(fld.occupancy.astype(np.float32), fld.voxel_size, fld.origin)
    occ = (fld.values >= threshold).astype(np.uint8)
    return VoxelGrid(occ, fld.voxel_size, fld.origin)


def _flat_xfirst(values: np.ndarray) -> np.ndarray:
    """Flatten [x, y, z]-indexed array to the canonical x-fastest order."""
    return values.ravel(order="F")


def _from_flat_xfirst(flat: np.ndarray, resolution: int) -> np.ndarray:
    return flat.reshape((resolution,) * 3, order="F")


def dump_vxg1(grid: VoxelGrid) -> bytes:
    """Serialize to the bit-packed binary grid format (little-endian, x-fastest)."""
    bits = _flat_xfirst(grid.occupancy)
    payload = np.packbits(bits, bitorder="little").tobytes()
    header = _HEADER.pack(VXG1_MAGIC, grid.resolution, grid.voxel_size, *grid.origin.tolist())
    return header + payload


def write_vxg1(path, grid: VoxelGrid) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_vxg1(grid))


def read_vxg1(path) -> VoxelGrid:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_vxg1(data)


def parse_vxg1(data: bytes) -> VoxelGrid:
    if len(data) < _HEADER.size:
        raise GridFormatError("truncated header")
    magic, resolution, voxel_size, ox, oy, oz = _HEADER.unpack_from(data)
    if magic != VXG1_MAGIC:
        raise GridFormatError(f"bad magic {magic!r}")
    if resolution == 0:
        raise GridFormatError("zero resolution")
    n = resolution ** 3
    need = (n + 7) // 8
    payload = data[_HEADER.size:_HEADER.size + need]
    if len(payload) < need:
        raise GridFormatError(f"truncated payload: got {len(payload)} bytes, need {need}")
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=n, bitorder="little")
    occ = _from_flat_xfirst(bits, resolution)
    return VoxelGrid(occ, voxel_size, np.array([ox, oy, oz]))


def write_vxf1(path, fld: OccupancyField) -> None:
    """Write the float occupancy-field variant (same header, float32 payload)."""
    header = _HEADER.pack(VXF1_MAGIC, fld.resolution, fld.voxel_size, *fld.origin.tolist())
    payload = _flat_xfirst(fld.values).astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_vxf1(path) -> OccupancyField:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise GridFormatError("truncated header")
    magic, resolution, voxel_size, ox, oy, oz = _HEADER.unpack_from(data)
    if magic != VXF1_MAGIC:
        raise GridFormatError(f"bad magic {magic!r}")
    n = resolution ** 3
    payload = data[_HEADER.size:_HEADER.size + 4 * n]
    if len(payload) < 4 * n:
        raise GridFormatError("truncated payload")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    return OccupancyField(_from_flat_xfirst(values, resolution), voxel_size, np.array([ox, oy, oz]))


def iou(a: VoxelGrid, b: VoxelGrid) -> float:
    """Intersection over union of two same-resolution binary grids."""
    if a.resolution != b.resolution:
        raise ValueError("resolution mismatch")
    inter = int(np.logical_and(a.occupancy, b.occupancy).sum())
    union = int(np.logical_or(a.occupancy, b.occupancy).sum())
    return 1.0 if union == 0 else inter / union

"""Sliding-window decomposition of cubic grids into overlapping patches.

Patch inference runs on windows and stitches results back with plain
averaging over overlaps, so memory stays bounded by the output accumulator
plus one batch of windows regardless of the full grid size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import OccupancyField, VoxelGrid


class LayoutError(ValueError):
    """Raised when a patch layout does not fit the grid it is applied to."""


class CoverageError(ValueError):
    """Raised when folded patches leave output voxels uncovered."""


@dataclass(frozen=True)
class PatchLayout:
    """Per-axis window start positions for a cubic grid.

    Starts form an arithmetic sequence with stride ``patch_size - overlap``
    from 0, plus a final position clamped to ``resolution - patch_size`` when
    the sequence does not land there exactly; windows then cover the whole
    grid. Pipeline use fixes ``overlap = patch_size // 4``.
    """

    resolution: int
    patch_size: int
    overlap: int

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size > self.resolution:
            raise LayoutError(
                f"patch size {self.patch_size} invalid for resolution {self.resolution}")
        if not 0 <= self.overlap < self.patch_size:
            raise LayoutError(
                f"overlap {self.overlap} invalid for patch size {self.patch_size}")

    @property
    def stride(self) -> int:
        return self.patch_size - self.overlap

    @property
    def positions(self) -> tuple[int, ...]:
        r, p = self.resolution, self.patch_size
        last = r - p
        starts = list(range(0, last + 1, self.stride))
        if starts[-1] != last:
            starts.append(last)
        return tuple(starts)

    def start_triples(self):
        """Cartesian product of per-axis starts, x-fastest ordering."""
        pos = self.positions
        return [(x, y, z) for z in pos for y in pos for x in pos]

    def n_patches(self) -> int:
        return len(self.positions) ** 3


def unfold(grid, layout: PatchLayout):
    """Copy out one cubic window per start triple.

    Returns a list of ``(patch, (x, y, z))`` pairs; patches are copies, so
    mutating them never aliases the source grid.
    """
    values = grid.occupancy if isinstance(grid, VoxelGrid) else grid.values
    if values.shape[0] != layout.resolution:
        raise LayoutError(
            f"layout resolution {layout.resolution} != grid resolution {values.shape[0]}")
    p = layout.patch_size
    out = []
    for (x, y, z) in layout.start_triples():
        out.append((values[x:x + p, y:y + p, z:z + p].copy(), (x, y, z)))
    return out


class FoldAccumulator:
    """Streaming mean-of-overlaps buffer: add patches, then resolve.

    Keeps one float32 sum volume and one uint16 coverage count; together these
    are the only full-resolution allocations patch-streamed inference needs.
    """

    def __init__(self, resolution: int):
        self.resolution = resolution
        self.sums = np.zeros((resolution,) * 3, dtype=np.float32)
        self.counts = np.zeros((resolution,) * 3, dtype=np.uint16)

    def add(self, patch: np.ndarray, position) -> None:
        x, y, z = position
        p = patch.shape[0]
        if x < 0 or y < 0 or z < 0 or max(x, y, z) + p > self.resolution:
            raise LayoutError(f"patch at {position} size {p} exceeds bounds {self.resolution}")
        self.sums[x:x + p, y:y + p, z:z + p] += patch
        self.counts[x:x + p, y:y + p, z:z + p] += 1

    @property
    def nbytes(self) -> int:
        return self.sums.nbytes + self.counts.nbytes

    def resolve(self, voxel_size=0.75, origin=(0.0, 0.0, 0.0)) -> OccupancyField:
        if (self.counts == 0).any():
            n = int((self.counts == 0).sum())
            raise CoverageError(f"{n} voxels left uncovered by folded patches")
        values = self.sums / self.counts
        return OccupancyField(values.astype(np.float32), voxel_size, np.asarray(origin))


def fold(patches, fine_resolution: int, voxel_size=0.75, origin=(0.0, 0.0, 0.0)) -> OccupancyField:
    """Average a list of ``(patch, position)`` pairs into one field.

    Every output voxel must be covered by at least one patch.
    """
    acc = FoldAccumulator(fine_resolution)
    for patch, position in patches:
        acc.add(np.asarray(patch, dtype=np.float32), position)
    return acc.resolve(voxel_size, origin)

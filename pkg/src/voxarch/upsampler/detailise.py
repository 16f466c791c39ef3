"""Full-grid detailisation: unfold, denoise patch batches, fold, repeat.

Patches stream through a fixed-size batch while a sum/count fold buffer
accumulates the fine grid, so additional memory is bounded by the fold
buffer plus one batch regardless of how large the full grid is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..grids import VoxelGrid, binarize
from ..patches import FoldAccumulator, PatchLayout
from .sample import ddim_batch
from .train import LevelConfig

__all__ = ["MemoryStats", "MissingLevelError", "upsample_level", "detailise"]


class MissingLevelError(KeyError):
    """No checkpoint/model registered for a requested level."""


@dataclass
class MemoryStats:
    """High-water marks collected while detailising."""

    fold_buffer_bytes: int = 0
    batch_bytes: int = 0
    output_bytes: int = 0
    patches_total: int = 0
    levels: list = field(default_factory=list)

    def record_level(self, level: int, fold_bytes: int, batch_bytes: int, patches: int):
        self.levels.append(
            {
                "level": level,
                "fold_buffer_bytes": fold_bytes,
                "batch_bytes": batch_bytes,
                "patches": patches,
            }
        )
        self.fold_buffer_bytes = max(self.fold_buffer_bytes, fold_bytes)
        self.batch_bytes = max(self.batch_bytes, batch_bytes)
        self.patches_total += patches


def _batch_nbytes(*tensors) -> int:
    return sum(t.element_size() * t.nelement() for t in tensors)


def upsample_level(
    grid: VoxelGrid,
    model,
    schedule,
    level: int,
    batch_size: int = 32,
    ddim_steps: int = 100,
    seed: int = 0,
    progress=None,
    stats: MemoryStats | None = None,
):
    """One level of patch-wise upsampling; returns the pre-binarization field.

    Every patch's starting noise is seeded by (seed, level, patch index),
    so the output is independent of the batch partitioning.
    """
    lc = LevelConfig(level)
    r = grid.resolution
    if r < lc.coarse_patch:
        raise ValueError(f"grid resolution {r} below level-{level} patch {lc.coarse_patch}")
    layout = PatchLayout(r, lc.coarse_patch, lc.overlap)
    fine_layout = PatchLayout(2 * r, lc.fine_patch, 2 * lc.overlap)
    acc = FoldAccumulator(2 * r)

    starts = list(layout.start_triples())
    occ = grid.occupancy
    total = len(starts)
    done = 0
    batch_hwm = 0
    for lo in range(0, total, batch_size):
        chunk = starts[lo : lo + batch_size]
        conds = []
        seeds = []
        for offset, (x, y, z) in enumerate(chunk):
            p = lc.coarse_patch
            coarse = occ[x : x + p, y : y + p, z : z + p].astype(np.float32)
            up = np.repeat(np.repeat(np.repeat(coarse, 2, 0), 2, 1), 2, 2)
            conds.append(up * 2.0 - 1.0)
            idx = lo + offset
            seeds.append(int(np.random.SeedSequence(entropy=[seed, level, idx]).generate_state(1)[0]))
        cond = torch.from_numpy(np.stack(conds))[:, None]
        out = ddim_batch(model, schedule, cond, steps=ddim_steps, seeds=seeds)
        batch_hwm = max(batch_hwm, _batch_nbytes(cond, out))
        for offset, (x, y, z) in enumerate(chunk):
            acc.add(out[offset, 0].numpy(), (2 * x, 2 * y, 2 * z))
        done += len(chunk)
        if progress is not None:
            progress(done, total)

    if stats is not None:
        stats.record_level(level, acc.nbytes, batch_hwm, total)
    assert fine_layout.n_patches() == total
    return acc.resolve(voxel_size=grid.voxel_size / 2.0, origin=tuple(grid.origin))


def detailise(
    grid: VoxelGrid,
    target_level: int,
    models,
    batch_size: int = 32,
    ddim_steps: int = 100,
    seed: int = 0,
    threshold: float = 0.5,
    progress=None,
    stats: MemoryStats | None = None,
) -> VoxelGrid:
    """Chain levels 1..target_level, binarizing between levels.

    ``models`` maps level -> (model, schedule). Doubling per level takes
    a 64-cube to 128/256/512 cubes for target levels 1/2/3.
    """
    if target_level not in (1, 2, 3):
        raise ValueError("target_level must be 1, 2 or 3")
    current = grid
    for level in range(1, target_level + 1):
        if level not in models:
            raise MissingLevelError(f"no model for level {level}")
        model, schedule = models[level]

        def report(done, total, _level=level):
            if progress is not None:
                progress(_level, done, total)

        fld = upsample_level(
            current,
            model,
            schedule,
            level,
            batch_size=batch_size,
            ddim_steps=ddim_steps,
            seed=seed,
            progress=report,
            stats=stats,
        )
        current = binarize(fld, threshold=threshold)
        if stats is not None:
            stats.output_bytes = max(stats.output_bytes, current.occupancy.nbytes)
    return current

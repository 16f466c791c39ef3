"""Deterministic DDIM inference for one level."""

from __future__ import annotations

import numpy as np
import torch

from ..grids import OccupancyField, VoxelGrid, subdivide
from .schedule import NoiseSchedule

__all__ = ["ddim_timesteps", "ddim_batch", "ddim_sample", "patch_noise"]


def ddim_timesteps(T: int, steps: int) -> np.ndarray:
    """Evenly spaced descending timesteps including T and 1."""
    if not 1 <= steps <= T:
        raise ValueError(f"steps must lie in [1, {T}]")
    ts = np.unique(np.round(np.linspace(1, T, steps)).astype(np.int64))
    return ts[::-1].copy()


def patch_noise(shape, seed: int) -> torch.Tensor:
    gen = torch.Generator().manual_seed(int(seed))
    return torch.randn(shape, generator=gen)


@torch.no_grad()
def ddim_batch(
    model,
    schedule: NoiseSchedule,
    cond: torch.Tensor,
    steps: int = 100,
    seeds=None,
    noise: torch.Tensor | None = None,
    clip: bool = True,
) -> torch.Tensor:
    """Eta=0 DDIM over a batch of conditions.

    ``cond`` is (B, 1, N, N, N) in +-1 scale. Each sample's starting
    noise comes from its own seed, so results do not depend on how a
    patch set was split into batches. Returns fields in [0, 1]; the x0
    estimate is clamped to the valid range at every step when ``clip``.
    """
    model.eval()
    b = cond.shape[0]
    if noise is None:
        if seeds is None:
            raise ValueError("provide seeds or an explicit noise tensor")
        noise = torch.cat([patch_noise((1, *cond.shape[1:]), s) for s in seeds])
    x = noise.to(cond.dtype)
    ts = ddim_timesteps(schedule.T, steps)
    for i, t in enumerate(ts):
        t_vec = torch.full((b,), int(t), dtype=torch.int64)
        eps = model(torch.cat([x, cond], dim=1), t_vec)
        ab_t = float(schedule.alpha_bar(int(t)))
        x0 = (x - (1.0 - ab_t) ** 0.5 * eps) / ab_t**0.5
        if clip:
            x0 = x0.clamp(-1.0, 1.0)
        t_next = int(ts[i + 1]) if i + 1 < len(ts) else 0
        ab_n = float(schedule.alpha_bar(t_next))
        x = ab_n**0.5 * x0 + (1.0 - ab_n) ** 0.5 * eps
    return (x + 1.0) / 2.0


def ddim_sample(
    model,
    schedule: NoiseSchedule,
    coarse: VoxelGrid,
    steps: int = 100,
    seed: int = 0,
    clip: bool = True,
) -> OccupancyField:
    """Upsample one coarse patch to its 2x fine field."""
    fine = subdivide(coarse)
    cond = torch.from_numpy(fine.occupancy.astype(np.float32))[None, None] * 2.0 - 1.0
    out = ddim_batch(model, schedule, cond, steps=steps, seeds=[seed], clip=clip)
    return OccupancyField(
        out[0, 0].numpy().astype(np.float32),
        voxel_size=coarse.voxel_size / 2.0,
        origin=tuple(coarse.origin),
    )

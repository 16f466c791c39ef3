"""Autoregressive sampling: unconditional, prefix-forced, plan-driven."""

from __future__ import annotations

import warnings

import numpy as np
import torch
from torch.nn import functional as F

from ..grids import VoxelGrid, binarize
from .model import MiniGpt
from .tokens import sos_id, tokenize

__all__ = [
    "sample_tokens",
    "complete",
    "plan_complete",
    "build_plan_grid",
    "plan_known_mask",
    "decode_sequence",
]


@torch.no_grad()
def sample_tokens(
    model: MiniGpt,
    top_k: int | None = None,
    temperature: float = 1.0,
    seed: int = 0,
    forced=None,
    known=None,
    progress=None,
) -> np.ndarray:
    """Sample one full token sequence.

    ``known`` marks positions whose token is copied from ``forced``
    instead of sampled, so completions never alter fixed tokens. With
    top_k=1 the choice is the argmax and the seed is irrelevant.
    """
    model.eval()
    cfg = model.config
    k_classes = cfg.codebook_size
    if top_k is None:
        top_k = min(cfg.top_k, k_classes)
    if not 1 <= top_k <= k_classes:
        raise ValueError(f"top_k must be in [1, {k_classes}], got {top_k}")
    if temperature <= 0:
        raise ValueError("temperature must be positive")

    known_flat = None
    forced_flat = None
    if known is not None:
        known_flat = np.asarray(known, dtype=bool).ravel(order="F")
        forced_flat = np.asarray(forced, dtype=np.int64).ravel()
        if known_flat.shape != forced_flat.shape:
            raise ValueError("known mask and forced tokens disagree in length")

    gen = torch.Generator().manual_seed(seed)
    length = cfg.sequence_length
    tokens = [sos_id(k_classes)]
    for i in range(length):
        if known_flat is not None and known_flat[i]:
            tokens.append(int(forced_flat[i]))
        else:
            inp = torch.tensor([tokens], dtype=torch.int64)
            logits = model(inp)[0, -1] / temperature
            if top_k == 1:
                tokens.append(int(logits.argmax()))
            else:
                if top_k < k_classes:
                    kth = torch.topk(logits, top_k).values[-1]
                    logits = logits.masked_fill(logits < kth, float("-inf"))
                probs = F.softmax(logits, dim=-1)
                tokens.append(int(torch.multinomial(probs, 1, generator=gen)))
        if progress is not None:
            progress(i + 1, length)
    return np.asarray(tokens[1:], dtype=np.int64)


def complete(
    model: MiniGpt,
    vqgan,
    partial_grid: VoxelGrid,
    known,
    k: int = 1,
    top_k: int | None = None,
    temperature: float = 1.0,
    seed: int = 0,
    progress=None,
) -> list:
    """k completions of a partial grid; known latent cells stay fixed."""
    base = tokenize(vqgan.index_map(partial_grid))
    known_arr = np.asarray(known, dtype=bool)
    known_flat = known_arr.ravel(order="F")
    if known_flat.shape != base.shape:
        raise ValueError("known mask does not match the latent resolution")
    if known_flat.all():
        return [base.copy() for _ in range(k)]
    return [
        sample_tokens(
            model,
            top_k=top_k,
            temperature=temperature,
            seed=seed + i,
            forced=base,
            known=known_arr,
            progress=progress,
        )
        for i in range(k)
    ]


def build_plan_grid(plan: np.ndarray, resolution: int, voxel_size: float = 0.75) -> VoxelGrid:
    """Extrude a top-view bitmap into the z=0 layer of an empty grid."""
    plan = np.asarray(plan).astype(bool)
    if plan.shape != (resolution, resolution):
        raise ValueError(f"plan must be ({resolution}, {resolution}), got {plan.shape}")
    occ = np.zeros((resolution, resolution, resolution), dtype=np.uint8)
    occ[:, :, 0] = plan
    return VoxelGrid(occ, voxel_size=voxel_size)


def plan_known_mask(plan: np.ndarray, r: int, patch: int) -> np.ndarray:
    """Bottom-slab cells whose source patch contains plan content."""
    plan = np.asarray(plan).astype(bool)
    known = np.zeros((r, r, r), dtype=bool)
    for u in range(r):
        for v in range(r):
            tile = plan[u * patch : (u + 1) * patch, v * patch : (v + 1) * patch]
            known[u, v, 0] = bool(tile.any())
    return known


def plan_complete(
    model: MiniGpt,
    vqgan,
    plan: np.ndarray,
    k: int = 1,
    top_k: int | None = None,
    temperature: float = 1.0,
    seed: int = 0,
    progress=None,
) -> list:
    """Completions conditioned on a floor plan's extruded bottom layer."""
    plan = np.asarray(plan).astype(bool)
    if not plan.any():
        warnings.warn("empty plan; falling back to unconditional sampling")
        return [
            sample_tokens(model, top_k=top_k, temperature=temperature, seed=seed + i)
            for i in range(k)
        ]
    resolution = vqgan.config.resolution
    r = vqgan.config.latent_resolution
    grid = build_plan_grid(plan, resolution)
    known = plan_known_mask(plan, r, resolution // r)
    return complete(
        model,
        vqgan,
        grid,
        known,
        k=k,
        top_k=top_k,
        temperature=temperature,
        seed=seed,
        progress=progress,
    )


def decode_sequence(vqgan, tokens, threshold: float = 0.5, voxel_size: float = 0.75) -> VoxelGrid:
    """Tokens -> index map -> decoder -> binarized grid."""
    from .tokens import detokenize

    idx = detokenize(tokens, vqgan.config.latent_resolution)
    vol = vqgan.decode_indices(idx).numpy()
    from ..grids import OccupancyField

    field = OccupancyField(vol.astype(np.float32), voxel_size=voxel_size)
    return binarize(field, threshold=threshold)

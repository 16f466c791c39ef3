"""Per-level training on coarse/fine chunk pairs."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.nn import functional as F

from ..grids import VoxelGrid, subdivide
from ..vqgan.losses import TrainingDivergence
from ..vqgan.train import config_hash
from .denoiser import DenoiserConfig, UNet3d
from .schedule import NoiseSchedule, forward_diffuse, make_schedule

__all__ = [
    "LevelConfig",
    "level_config",
    "UpsamplerTrainConfig",
    "UpsamplerTrainResult",
    "train_level",
    "load_level",
    "checkpoint_name",
]

LEVELS = (1, 2, 3)


@dataclass(frozen=True)
class LevelConfig:
    level: int

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}")

    @property
    def coarse_patch(self) -> int:
        return 8 << (self.level - 1)  # 8, 16, 32

    @property
    def fine_patch(self) -> int:
        return self.coarse_patch * 2

    @property
    def overlap(self) -> int:
        return self.coarse_patch // 4


def level_config(level: int) -> LevelConfig:
    return LevelConfig(level)


def checkpoint_name(level: int) -> str:
    return f"upsampler_l{level}.pt"


@dataclass(frozen=True)
class UpsamplerTrainConfig:
    level: int = 1
    base_channels: int = 32
    lr: float = 1e-4
    epochs: int = 256
    batch_size: int = 32
    T: int = 1000
    beta_1: float = 1e-4
    beta_T: float = 0.02
    seed: int = 0

    def schedule(self) -> NoiseSchedule:
        return make_schedule(self.T, self.beta_1, self.beta_T)


@dataclass
class UpsamplerTrainResult:
    checkpoint: Path
    sidecar: Path
    history: list


def _as_array(grid) -> np.ndarray:
    return np.asarray(grid.occupancy if isinstance(grid, VoxelGrid) else grid, dtype=np.float32)


def _prepare_pairs(pairs, lc: LevelConfig):
    """Stack (coarse, fine) grids into +-1 tensors with checked shapes."""
    conds, fines = [], []
    for coarse, fine in pairs:
        c = _as_array(coarse)
        f = _as_array(fine)
        if c.shape != (lc.coarse_patch,) * 3 or f.shape != (lc.fine_patch,) * 3:
            raise ValueError(
                f"level {lc.level} expects {lc.coarse_patch}^3 -> {lc.fine_patch}^3 pairs, "
                f"got {c.shape} -> {f.shape}"
            )
        up = subdivide(VoxelGrid(c.astype(np.uint8))).occupancy.astype(np.float32)
        conds.append(up * 2.0 - 1.0)
        fines.append(f * 2.0 - 1.0)
    cond = torch.from_numpy(np.stack(conds))[:, None]
    x0 = torch.from_numpy(np.stack(fines))[:, None]
    return cond, x0


def train_level(
    pairs,
    config: UpsamplerTrainConfig,
    out_dir,
    progress=None,
    resume=None,
) -> UpsamplerTrainResult:
    """Minimize E||eps - eps_theta(x_t, t, coarse)||^2 with Adam."""
    lc = LevelConfig(config.level)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / checkpoint_name(config.level)
    sidecar_path = ckpt_path.with_suffix(".json")

    cond, x0 = _prepare_pairs(pairs, lc)
    n = cond.shape[0]
    schedule = config.schedule()

    torch.manual_seed(config.seed)
    model = UNet3d(DenoiserConfig(base_channels=config.base_channels, seed=config.seed))
    opt = torch.optim.Adam(model.parameters(), lr=config.lr)

    history: list = []
    start_epoch = 0
    if resume is not None:
        state = torch.load(resume, map_location="cpu", weights_only=False)
        model.load_state_dict(state["model"])
        opt.load_state_dict(state["opt"])
        torch.set_rng_state(state["torch_rng"])
        history = list(state["history"])
        start_epoch = int(state["epoch"])

    steps_per_epoch = max(1, math.ceil(n / config.batch_size))
    model.train()
    for epoch in range(start_epoch, config.epochs):
        rng = np.random.default_rng([config.seed, 31000 + epoch])
        gen = torch.Generator().manual_seed(int(rng.integers(0, 2**63 - 1)))
        order = rng.permutation(n)
        loss_sum = 0.0
        for b in range(steps_per_epoch):
            idx = order[b * config.batch_size : (b + 1) * config.batch_size]
            if idx.size == 0:
                continue
            xb = x0[idx]
            cb = cond[idx]
            t = rng.integers(1, config.T + 1, size=idx.size)
            noise = torch.randn(xb.shape, generator=gen)
            x_t = forward_diffuse(xb, t, noise, schedule)
            pred = model(torch.cat([x_t, cb], dim=1), torch.from_numpy(t))
            loss = F.mse_loss(pred, noise)
            if not torch.isfinite(loss):
                raise TrainingDivergence(
                    "non-finite upsampler loss",
                    {"epoch": epoch, "level": config.level, "last_checkpoint": str(ckpt_path)},
                )
            opt.zero_grad()
            loss.backward()
            opt.step()
            loss_sum += float(loss.detach())

        entry = {"epoch": epoch + 1, "mse": loss_sum / steps_per_epoch}
        history.append(entry)
        tmp = ckpt_path.with_suffix(".tmp")
        torch.save(
            {
                "model": model.state_dict(),
                "opt": opt.state_dict(),
                "torch_rng": torch.get_rng_state(),
                "epoch": epoch + 1,
                "config": dataclasses.asdict(config),
                "history": history,
            },
            tmp,
        )
        os.replace(tmp, ckpt_path)
        sidecar_path.write_text(
            json.dumps(
                {
                    "config_hash": config_hash(config),
                    "level": config.level,
                    "coarse_patch": lc.coarse_patch,
                    "fine_patch": lc.fine_patch,
                    "T": config.T,
                    "epoch": epoch + 1,
                },
                indent=2,
            )
        )
        if progress is not None and progress(epoch + 1, entry):
            break

    return UpsamplerTrainResult(checkpoint=ckpt_path, sidecar=sidecar_path, history=history)


def load_level(checkpoint):
    """Returns (model, schedule, config dict) for a trained level."""
    state = torch.load(checkpoint, map_location="cpu", weights_only=False)
    cfg = state["config"]
    model = UNet3d(DenoiserConfig(base_channels=cfg["base_channels"], seed=cfg["seed"]))
    model.load_state_dict(state["model"])
    model.eval()
    schedule = make_schedule(cfg["T"], cfg["beta_1"], cfg["beta_T"])
    return model, schedule, cfg

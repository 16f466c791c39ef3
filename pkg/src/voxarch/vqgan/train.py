"""Joint training loop for the volumetric autoencoder and discriminator."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .losses import (
    LossWeights,
    TrainingDivergence,
    compute_losses,
    discriminator_loss,
)
from .networks import PatchDiscriminator3d, Vqgan, VqganConfig, grids_to_batch
from .perceptual import default_extractor

__all__ = [
    "VqganTrainConfig",
    "TrainResult",
    "train_vqgan",
    "load_vqgan",
    "export_codebook",
    "codebook_usage",
    "config_hash",
]


@dataclass(frozen=True)
class VqganTrainConfig:
    resolution: int = 64
    base_channels: int = 32
    codebook_size: int = 512
    embed_dim: int = 128
    lr_g: float = 1e-4
    lr_d: float = 1e-6
    epochs: int = 128
    batch_size: int = 4
    weights: LossWeights = LossWeights()
    recon: str = "bce"
    adversarial: str = "hinge"
    ramp_frac: float = 0.1  # fraction of steps over which delta ramps from 0
    perceptual_seed: int = 0
    seed: int = 0

    def model_config(self) -> VqganConfig:
        return VqganConfig(
            resolution=self.resolution,
            base_channels=self.base_channels,
            codebook_size=self.codebook_size,
            embed_dim=self.embed_dim,
            seed=self.seed,
        )


@dataclass
class TrainResult:
    checkpoint: Path
    sidecar: Path
    history: list


def config_hash(config) -> str:
    payload = json.dumps(dataclasses.asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _sidecar_payload(config: VqganTrainConfig, epoch: int) -> dict:
    return {
        "config_hash": config_hash(config),
        "K": config.codebook_size,
        "D": config.embed_dim,
        "r": config.resolution // 8,
        "R": config.resolution,
        "loss_weights": dataclasses.asdict(config.weights),
        "epoch": epoch,
    }


def _save(path: Path, payload: dict):
    tmp = path.with_suffix(".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)


def train_vqgan(
    grids,
    config: VqganTrainConfig,
    out_dir,
    progress=None,
    resume=None,
) -> TrainResult:
    """Optimize encoder/decoder/codebook (Adam 1e-4) and discriminator (1e-6).

    A checkpoint plus sidecar JSON is written after every epoch; a
    non-finite loss aborts with TrainingDivergence pointing at the last
    good checkpoint. ``progress(epoch, entry)`` may return truthy to stop
    early (the checkpoint for that epoch is already on disk).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "vqgan.pt"
    sidecar_path = out_dir / "vqgan.json"

    torch.manual_seed(config.seed)
    model = Vqgan(config.model_config())
    disc = PatchDiscriminator3d(config.base_channels)
    opt_g = torch.optim.Adam(
        list(model.parameters()), lr=config.lr_g, betas=(0.5, 0.9)
    )
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.lr_d, betas=(0.5, 0.9))

    history: list = []
    start_epoch = 0
    if resume is not None:
        state = torch.load(resume, map_location="cpu", weights_only=False)
        model.load_state_dict(state["model"])
        disc.load_state_dict(state["disc"])
        opt_g.load_state_dict(state["opt_g"])
        opt_d.load_state_dict(state["opt_d"])
        torch.set_rng_state(state["torch_rng"])
        history = list(state["history"])
        start_epoch = int(state["epoch"])

    extractor = default_extractor(config.perceptual_seed) if config.weights.beta > 0 else None

    data = grids_to_batch(grids)
    if data.shape[2] != config.resolution:
        raise ValueError(
            f"dataset resolution {data.shape[2]} != configured {config.resolution}"
        )
    n = data.shape[0]
    steps_per_epoch = max(1, math.ceil(n / config.batch_size))
    total_steps = config.epochs * steps_per_epoch
    ramp_steps = max(1, int(config.ramp_frac * total_steps))
    use_disc = config.weights.delta > 0

    model.train()
    disc.train()
    for epoch in range(start_epoch, config.epochs):
        order = np.random.default_rng([config.seed, 1000 + epoch]).permutation(n)
        sums: dict = {}
        for b in range(steps_per_epoch):
            step = epoch * steps_per_epoch + b
            idx = order[b * config.batch_size : (b + 1) * config.batch_size]
            if idx.size == 0:
                continue
            xb = data[idx]

            v_hat, latent, quant = model(xb)
            delta_scale = min(1.0, step / ramp_steps) if use_disc else 0.0
            logits_fake = disc(v_hat) if use_disc and delta_scale > 0 else None
            try:
                parts = compute_losses(
                    xb,
                    v_hat,
                    latent,
                    quant.codes,
                    logits_fake,
                    config.weights,
                    extractor=extractor,
                    recon=config.recon,
                    adversarial=config.adversarial,
                    delta_scale=delta_scale,
                    context={"epoch": epoch, "step": step},
                )
            except TrainingDivergence as exc:
                exc.diagnostics["last_checkpoint"] = str(ckpt_path) if epoch > 0 else None
                raise
            opt_g.zero_grad()
            parts.total.backward()
            opt_g.step()

            entry = parts.detach_floats()
            if use_disc:
                logits_real = disc(xb)
                logits_fake = disc(v_hat.detach())
                d_loss = discriminator_loss(logits_real, logits_fake, kind=config.adversarial)
                opt_d.zero_grad()
                d_loss.backward()
                opt_d.step()
                entry["d_loss"] = float(d_loss.detach())
            for key, val in entry.items():
                sums[key] = sums.get(key, 0.0) + val

        epoch_entry = {"epoch": epoch + 1}
        epoch_entry.update({k: v / steps_per_epoch for k, v in sums.items()})
        history.append(epoch_entry)

        _save(
            ckpt_path,
            {
                "model": model.state_dict(),
                "disc": disc.state_dict(),
                "opt_g": opt_g.state_dict(),
                "opt_d": opt_d.state_dict(),
                "torch_rng": torch.get_rng_state(),
                "epoch": epoch + 1,
                "config": dataclasses.asdict(config),
                "history": history,
            },
        )
        sidecar_path.write_text(json.dumps(_sidecar_payload(config, epoch + 1), indent=2))
        if progress is not None and progress(epoch + 1, epoch_entry):
            break

    return TrainResult(checkpoint=ckpt_path, sidecar=sidecar_path, history=history)


def load_vqgan(checkpoint) -> Vqgan:
    state = torch.load(checkpoint, map_location="cpu", weights_only=False)
    cfg = state["config"]
    model = Vqgan(
        VqganConfig(
            resolution=cfg["resolution"],
            base_channels=cfg["base_channels"],
            codebook_size=cfg["codebook_size"],
            embed_dim=cfg["embed_dim"],
            seed=cfg["seed"],
        )
    )
    model.load_state_dict(state["model"])
    model.eval()
    return model


def export_codebook(model: Vqgan, path):
    """Raw little-endian float32 K x D dump of the codebook."""
    data = model.codebook.weight.detach().numpy().astype("<f4")
    Path(path).write_bytes(data.tobytes())
    return Path(path)


@torch.no_grad()
def codebook_usage(model: Vqgan, grids) -> float:
    """Fraction of codebook entries referenced when encoding ``grids``."""
    model.eval()
    used = set()
    for g in grids:
        used.update(np.unique(model.index_map(g)).tolist())
    return len(used) / model.codebook.size

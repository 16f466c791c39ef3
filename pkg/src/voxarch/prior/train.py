"""Masked next-token training for the sequence prior."""

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

from ..vqgan.losses import TrainingDivergence
from ..vqgan.train import config_hash
from .model import MiniGpt, PriorConfig
from .tokens import mask_id, sos_id

__all__ = [
    "PriorTrainConfig",
    "PriorTrainResult",
    "train_prior",
    "load_prior",
    "teacher_forced_accuracy",
    "corrupt_inputs",
]


@dataclass(frozen=True)
class PriorTrainConfig:
    model: PriorConfig = PriorConfig()
    lr_min: float = 1e-5
    lr_max: float = 2.5e-4
    weight_decay: float = 0.01
    epochs: int = 128
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.lr_min <= self.lr_max:
            raise ValueError("need 0 < lr_min <= lr_max")


@dataclass
class PriorTrainResult:
    checkpoint: Path
    sidecar: Path
    history: list


def corrupt_inputs(sequences: np.ndarray, rate: float, rng, codebook_size: int) -> np.ndarray:
    """Model inputs: SOS prefix, shifted tokens, Bernoulli(rate) masking.

    Targets are the clean sequences; only the inputs are corrupted, and
    the SOS column is never masked.
    """
    seq = np.asarray(sequences, dtype=np.int64)
    shifted = np.concatenate(
        [np.full((seq.shape[0], 1), sos_id(codebook_size), dtype=np.int64), seq[:, :-1]],
        axis=1,
    )
    mask = rng.random(shifted.shape) < rate
    mask[:, 0] = False
    shifted[mask] = mask_id(codebook_size)
    return shifted


def _cosine_lr(step: int, total: int, lr_min: float, lr_max: float) -> float:
    frac = step / max(1, total - 1) if total > 1 else 0.0
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * frac))


def train_prior(
    sequences,
    config: PriorTrainConfig,
    out_dir,
    progress=None,
    resume=None,
) -> PriorTrainResult:
    """AdamW with cosine-annealed learning rate over masked sequences."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "prior.pt"
    sidecar_path = out_dir / "prior.json"

    seq = np.asarray(sequences, dtype=np.int64)
    mc = config.model
    if seq.ndim != 2 or seq.shape[1] != mc.sequence_length:
        raise ValueError(
            f"expected (N, {mc.sequence_length}) sequences, got {seq.shape}"
        )
    if seq.size and (seq.min() < 0 or seq.max() >= mc.codebook_size):
        raise ValueError("token outside codebook vocabulary")

    torch.manual_seed(config.seed)
    model = MiniGpt(mc)
    opt = torch.optim.AdamW(
        model.parameters(), lr=config.lr_max, weight_decay=config.weight_decay
    )

    history: list = []
    start_epoch = 0
    if resume is not None:
        state = torch.load(resume, map_location="cpu", weights_only=False)
        model.load_state_dict(state["model"])
        opt.load_state_dict(state["opt"])
        torch.set_rng_state(state["torch_rng"])
        history = list(state["history"])
        start_epoch = int(state["epoch"])

    n = seq.shape[0]
    steps_per_epoch = max(1, math.ceil(n / config.batch_size))
    total_steps = config.epochs * steps_per_epoch
    targets_all = torch.from_numpy(seq)

    model.train()
    for epoch in range(start_epoch, config.epochs):
        rng = np.random.default_rng([config.seed, 7000 + epoch])
        order = rng.permutation(n)
        rate = rng.uniform(mc.mask_lo, mc.mask_hi)
        nll_sum = 0.0
        for b in range(steps_per_epoch):
            step = epoch * steps_per_epoch + b
            idx = order[b * config.batch_size : (b + 1) * config.batch_size]
            if idx.size == 0:
                continue
            lr = _cosine_lr(step, total_steps, config.lr_min, config.lr_max)
            for group in opt.param_groups:
                group["lr"] = lr
            inputs = torch.from_numpy(
                corrupt_inputs(seq[idx], rate, rng, mc.codebook_size)
            )
            logits = model(inputs)
            loss = F.cross_entropy(
                logits.reshape(-1, mc.codebook_size), targets_all[idx].reshape(-1)
            )
            if not torch.isfinite(loss):
                raise TrainingDivergence(
                    "non-finite prior loss",
                    {"epoch": epoch, "step": step, "last_checkpoint": str(ckpt_path)},
                )
            opt.zero_grad()
            loss.backward()
            opt.step()
            nll_sum += float(loss.detach())

        entry = {"epoch": epoch + 1, "nll": nll_sum / steps_per_epoch, "lr": lr}
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
                    "K": mc.codebook_size,
                    "r": mc.latent_resolution,
                    "layers": mc.n_layers,
                    "heads": mc.n_heads,
                    "width": mc.width,
                    "epoch": epoch + 1,
                },
                indent=2,
            )
        )
        if progress is not None and progress(epoch + 1, entry):
            break

    return PriorTrainResult(checkpoint=ckpt_path, sidecar=sidecar_path, history=history)


def load_prior(checkpoint) -> MiniGpt:
    state = torch.load(checkpoint, map_location="cpu", weights_only=False)
    cfg = dict(state["config"]["model"])
    model = MiniGpt(PriorConfig(**cfg))
    model.load_state_dict(state["model"])
    model.eval()
    return model


@torch.no_grad()
def teacher_forced_accuracy(model: MiniGpt, sequences) -> float:
    """Fraction of positions where argmax equals the true next token."""
    model.eval()
    seq = np.asarray(sequences, dtype=np.int64)
    k = model.config.codebook_size
    inputs = torch.from_numpy(
        np.concatenate(
            [np.full((seq.shape[0], 1), sos_id(k), dtype=np.int64), seq[:, :-1]], axis=1
        )
    )
    pred = model(inputs).argmax(dim=-1).numpy()
    return float((pred == seq).mean())

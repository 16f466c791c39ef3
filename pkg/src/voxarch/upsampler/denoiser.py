"""Conditional 3D U-Net noise predictor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn
from torch.nn import functional as F

__all__ = ["DenoiserConfig", "UNet3d", "sinusoidal_embedding", "IdentityDenoiser"]


def sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Standard transformer-style timestep embedding, (B, dim)."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float32) / max(half - 1, 1)
    )
    args = t.float()[:, None] * freqs[None, :]
    emb = torch.cat([torch.sin(args), torch.cos(args)], dim=1)
    if dim % 2:
        emb = F.pad(emb, (0, 1))
    return emb


def _norm(channels: int) -> nn.Module:
    groups = 8 if channels % 8 == 0 else 1
    return nn.GroupNorm(groups, channels)


class TimeResBlock(nn.Module):
    def __init__(self, channels: int, emb_dim: int):
        super().__init__()
        self.norm1 = _norm(channels)
        self.conv1 = nn.Conv3d(channels, channels, 3, padding=1)
        self.emb_proj = nn.Linear(emb_dim, channels)
        self.norm2 = _norm(channels)
        self.conv2 = nn.Conv3d(channels, channels, 3, padding=1)

    def forward(self, x, emb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.emb_proj(F.silu(emb))[:, :, None, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return x + h


@dataclass(frozen=True)
class DenoiserConfig:
    base_channels: int = 32
    in_channels: int = 2  # noisy fine patch + subdivided coarse condition
    seed: int = 0


class UNet3d(nn.Module):
    """Three-scale encoder-decoder with skips; predicts the added noise.

    Input is the channel concatenation of the noisy fine patch and the
    octant-subdivided coarse patch; the final convolution starts at zero
    so the untrained model predicts zero noise.
    """

    def __init__(self, config: DenoiserConfig = DenoiserConfig()):
        super().__init__()
        torch.manual_seed(config.seed)
        self.config = config
        c = config.base_channels
        emb = 4 * c
        self.emb_dim = c
        self.time_mlp = nn.Sequential(nn.Linear(c, emb), nn.SiLU(), nn.Linear(emb, emb))

        self.stem = nn.Conv3d(config.in_channels, c, 3, padding=1)
        self.enc1 = TimeResBlock(c, emb)
        self.down1 = nn.Conv3d(c, 2 * c, 4, stride=2, padding=1)
        self.enc2 = TimeResBlock(2 * c, emb)
        self.down2 = nn.Conv3d(2 * c, 4 * c, 4, stride=2, padding=1)
        self.mid = TimeResBlock(4 * c, emb)
        self.up2 = nn.ConvTranspose3d(4 * c, 2 * c, 4, stride=2, padding=1)
        self.fuse2 = nn.Conv3d(4 * c, 2 * c, 1)
        self.dec2 = TimeResBlock(2 * c, emb)
        self.up1 = nn.ConvTranspose3d(2 * c, c, 4, stride=2, padding=1)
        self.fuse1 = nn.Conv3d(2 * c, c, 1)
        self.dec1 = TimeResBlock(c, emb)
        self.out_norm = _norm(c)
        self.out = nn.Conv3d(c, 1, 3, padding=1)
        nn.init.zeros_(self.out.weight)
        nn.init.zeros_(self.out.bias)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        if x.ndim != 5 or x.shape[1] != self.config.in_channels:
            raise ValueError(f"expected (B, {self.config.in_channels}, N, N, N)")
        if x.shape[2] % 4 != 0:
            raise ValueError("patch size must be divisible by 4")
        emb = self.time_mlp(sinusoidal_embedding(t, self.emb_dim))

        h1 = self.enc1(self.stem(x), emb)
        h2 = self.enc2(self.down1(h1), emb)
        m = self.mid(self.down2(h2), emb)
        u2 = self.dec2(self.fuse2(torch.cat([self.up2(m), h2], dim=1)), emb)
        u1 = self.dec1(self.fuse1(torch.cat([self.up1(u2), h1], dim=1)), emb)
        return self.out(F.silu(self.out_norm(u1)))


class IdentityDenoiser(nn.Module):
    """Oracle stub: predicts exactly the noise that maps x_t back to the
    conditioning field, so DDIM reproduces the subdivided coarse input.

    Useful for plumbing and locality tests of the detailisation driver.
    """

    def __init__(self, schedule):
        super().__init__()
        self.schedule = schedule

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        noisy, cond = x[:, :1], x[:, 1:2]
        ab = torch.as_tensor(
            self.schedule.alpha_bar(t.numpy()), dtype=noisy.dtype
        ).view(-1, 1, 1, 1, 1)
        return (noisy - torch.sqrt(ab) * cond) / torch.sqrt(1.0 - ab).clamp_min(1e-12)

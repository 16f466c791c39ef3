"""Volumetric encoder/decoder and the 3D patch discriminator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..grids import OccupancyField, VoxelGrid
from .quantize import Codebook, Quantized

__all__ = [
    "VqganConfig",
    "ResBlock3d",
    "Encoder3d",
    "Decoder3d",
    "PatchDiscriminator3d",
    "Vqgan",
    "grids_to_batch",
    "batch_to_fields",
]

N_STAGES = 3  # fixed 2x downsamplings, so the latent is R/8 per axis


def _norm(channels: int) -> nn.Module:
    groups = 8 if channels % 8 == 0 else 1
    return nn.GroupNorm(groups, channels)


class ResBlock3d(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.norm1 = _norm(channels)
        self.conv1 = nn.Conv3d(channels, channels, 3, padding=1)
        self.norm2 = _norm(channels)
        self.conv2 = nn.Conv3d(channels, channels, 3, padding=1)

    def forward(self, x):
        h = self.conv1(F.silu(self.norm1(x)))
        h = self.conv2(F.silu(self.norm2(h)))
        return x + h


class Encoder3d(nn.Module):
    """Strided residual encoder: (B,1,R,R,R) -> (B,D,R/8,R/8,R/8)."""

    def __init__(self, base_channels: int, embed_dim: int):
        super().__init__()
        c = base_channels
        layers: list[nn.Module] = [nn.Conv3d(1, c, 3, padding=1)]
        for _ in range(N_STAGES):
            layers.append(ResBlock3d(c))
            layers.append(nn.Conv3d(c, 2 * c, 4, stride=2, padding=1))
            c *= 2
        layers += [ResBlock3d(c), _norm(c), nn.SiLU(), nn.Conv3d(c, embed_dim, 3, padding=1)]
        self.net = nn.Sequential(*layers)

    def forward(self, x):
        if x.ndim != 5 or x.shape[2] % (1 << N_STAGES) != 0:
            raise ValueError(f"expected (B,1,R,R,R) with R divisible by 8, got {tuple(x.shape)}")
        return self.net(x)


class Decoder3d(nn.Module):
    """Mirrored decoder with terminal sigmoid: latent -> [0,1] field."""

    def __init__(self, base_channels: int, embed_dim: int):
        super().__init__()
        c = base_channels << N_STAGES
        layers: list[nn.Module] = [nn.Conv3d(embed_dim, c, 3, padding=1), ResBlock3d(c)]
        for _ in range(N_STAGES):
            layers.append(nn.ConvTranspose3d(c, c // 2, 4, stride=2, padding=1))
            c //= 2
            layers.append(ResBlock3d(c))
        layers += [_norm(c), nn.SiLU(), nn.Conv3d(c, 1, 3, padding=1), nn.Sigmoid()]
        self.net = nn.Sequential(*layers)

    def forward(self, z):
        return self.net(z)


class PatchDiscriminator3d(nn.Module):
    """Patch discriminator whose every logit sees exactly an 8^3 block.

    Three non-overlapping stride-2 convolutions give a receptive field of
    8 per axis; the final 1x1x1 convolution keeps it there, so the logit
    map for a 64^3 input covers the 8^3 patch positions.
    """

    def __init__(self, base_channels: int = 32):
        super().__init__()
        c = base_channels
        self.net = nn.Sequential(
            nn.Conv3d(1, c, 2, stride=2),
            nn.LeakyReLU(0.2),
            nn.Conv3d(c, 2 * c, 2, stride=2),
            nn.LeakyReLU(0.2),
            nn.Conv3d(2 * c, 4 * c, 2, stride=2),
            nn.LeakyReLU(0.2),
            nn.Conv3d(4 * c, 1, 1),
        )

    def forward(self, x):
        return self.net(x)


@dataclass(frozen=True)
class VqganConfig:
    resolution: int = 64
    base_channels: int = 32
    codebook_size: int = 512
    embed_dim: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.resolution % 8 != 0 or self.resolution < 8:
            raise ValueError("resolution must be a positive multiple of 8")

    @property
    def latent_resolution(self) -> int:
        return self.resolution // 8


class Vqgan(nn.Module):
    """Encoder, codebook and decoder bundled behind grid-level helpers."""

    def __init__(self, config: VqganConfig):
        super().__init__()
        torch.manual_seed(config.seed)
        self.config = config
        self.encoder = Encoder3d(config.base_channels, config.embed_dim)
        self.decoder = Decoder3d(config.base_channels, config.embed_dim)
        self.codebook = Codebook(config.codebook_size, config.embed_dim, seed=config.seed)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[2] != self.config.resolution:
            raise ValueError(
                f"expected resolution {self.config.resolution}, got {x.shape[2]}"
            )
        return self.encoder(x)

    def quantize(self, latent: torch.Tensor) -> Quantized:
        return self.codebook(latent)

    def decode(self, quantized: torch.Tensor) -> torch.Tensor:
        if quantized.shape[1] != self.config.embed_dim:
            raise ValueError(f"expected embed dim {self.config.embed_dim}")
        return self.decoder(quantized)

    def forward(self, x: torch.Tensor):
        latent = self.encode(x)
        quant = self.quantize(latent)
        return self.decode(quant.values), latent, quant

    @torch.no_grad()
    def index_map(self, grid: VoxelGrid) -> np.ndarray:
        """Quantized index map of a single grid, (r, r, r) int64."""
        self.eval()
        x = grids_to_batch([grid])
        quant = self.quantize(self.encode(x))
        return quant.indices[0].numpy()

    @torch.no_grad()
    def decode_indices(self, indices: np.ndarray) -> torch.Tensor:
        """Decode an (r, r, r) index map to a (R, R, R) occupancy tensor."""
        self.eval()
        idx = torch.from_numpy(np.ascontiguousarray(indices, dtype=np.int64))
        codes = self.codebook.weight[idx.reshape(-1)]
        codes = codes.view(1, *idx.shape, -1).permute(0, 4, 1, 2, 3)
        return self.decode(codes)[0, 0]

    @torch.no_grad()
    def reconstruct(self, grid: VoxelGrid) -> OccupancyField:
        self.eval()
        x = grids_to_batch([grid])
        probs, _, _ = self.forward(x)
        return OccupancyField(
            probs[0, 0].numpy().astype(np.float32),
            voxel_size=grid.voxel_size,
            origin=tuple(grid.origin),
        )


def grids_to_batch(grids) -> torch.Tensor:
    """Stack binary grids into a (B, 1, R, R, R) float tensor."""
    arrays = [np.asarray(g.occupancy if isinstance(g, VoxelGrid) else g) for g in grids]
    batch = np.stack(arrays).astype(np.float32)
    return torch.from_numpy(batch)[:, None]


def batch_to_fields(batch: torch.Tensor, voxel_size: float = 0.75) -> list:
    out = batch.detach().numpy().astype(np.float32)
    return [OccupancyField(out[i, 0], voxel_size=voxel_size) for i in range(out.shape[0])]

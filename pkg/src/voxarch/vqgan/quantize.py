"""Vector quantization: codebook, nearest-entry lookup, straight-through."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

__all__ = ["Codebook", "Quantized", "commitment_loss"]


@dataclass
class Quantized:
    """Result of quantizing a latent map.

    ``values`` carries straight-through gradients to the encoder,
    ``codes`` carries gradients to the codebook, ``indices`` is the
    integer index map.
    """

    values: torch.Tensor  # (B, D, r, r, r), gradient flows to the encoder
    codes: torch.Tensor  # (B, D, r, r, r), gradient flows to the codebook
    indices: torch.Tensor  # (B, r, r, r) int64 in [0, K)


class Codebook(nn.Module):
    """K learned D-dimensional embeddings with nearest-neighbor lookup.

    Entries are initialized from a zero-mean Gaussian scaled by 1/sqrt(D)
    and updated purely by the commitment loss (no EMA). Lookup returns the
    entry minimizing squared Euclidean distance; ties break to the lowest
    index.
    """

    def __init__(self, size: int, dim: int, seed: int = 0):
        super().__init__()
        if size < 1 or dim < 1:
            raise ValueError("codebook needs size >= 1 and dim >= 1")
        gen = torch.Generator().manual_seed(seed)
        weight = torch.randn(size, dim, generator=gen) / dim**0.5
        self.weight = nn.Parameter(weight)

    @property
    def size(self) -> int:
        return self.weight.shape[0]

    @property
    def dim(self) -> int:
        return self.weight.shape[1]

    def nearest(self, vectors: torch.Tensor) -> torch.Tensor:
        """Index of the nearest entry for each row of ``vectors`` (N, D)."""
        if vectors.shape[-1] != self.dim:
            raise ValueError(f"expected dim {self.dim}, got {vectors.shape[-1]}")
        w = self.weight.to(vectors.dtype)
        # \|z - e\|^2 expanded; the z^2 term is constant per row and dropped
        dist = (w * w).sum(1) - 2.0 * vectors @ w.T
        # torch.argmin returns the first (lowest) index among ties
        return dist.argmin(dim=1)

    def forward(self, latent: torch.Tensor) -> Quantized:
        """Quantize a (B, D, r, r, r) latent map cell-wise."""
        if latent.ndim != 5 or latent.shape[1] != self.dim:
            raise ValueError(f"expected (B, {self.dim}, r, r, r), got {tuple(latent.shape)}")
        b, d = latent.shape[:2]
        flat = latent.permute(0, 2, 3, 4, 1).reshape(-1, d)
        indices = self.nearest(flat.detach())
        codes = self.weight.to(latent.dtype)[indices]
        codes = codes.view(b, *latent.shape[2:], d).permute(0, 4, 1, 2, 3)
        # forward value is bit-exactly the selected rows; gradient is identity
        # to the encoder (latent - latent.detach() vanishes elementwise)
        values = codes.detach() + (latent - latent.detach())
        return Quantized(values=values, codes=codes, indices=indices.view(b, *latent.shape[2:]))


def commitment_loss(latent: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
    """Two-term commitment loss with stop-gradient semantics.

    ``mean(sg[latent] - codes)^2`` pulls the codebook toward encoder
    outputs; ``mean(sg[codes] - latent)^2`` pulls the encoder toward its
    assigned entries. Both terms are squared and averaged per element.
    """
    to_codebook = torch.mean((latent.detach() - codes) ** 2)
    to_encoder = torch.mean((codes.detach() - latent) ** 2)
    return to_codebook + to_encoder

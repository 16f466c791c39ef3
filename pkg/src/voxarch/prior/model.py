"""Miniature decoder-only transformer over codebook tokens."""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn
from torch.nn import functional as F

__all__ = ["PriorConfig", "MiniGpt"]


@dataclass(frozen=True)
class PriorConfig:
    codebook_size: int = 512
    latent_resolution: int = 8
    n_layers: int = 8
    n_heads: int = 8
    width: int = 256
    top_k: int = 32
    temperature: float = 1.0
    mask_lo: float = 0.1
    mask_hi: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.width % self.n_heads != 0:
            raise ValueError("width must be divisible by n_heads")
        if not 0.0 <= self.mask_lo <= self.mask_hi <= 1.0:
            raise ValueError("mask rate bounds must satisfy 0 <= lo <= hi <= 1")

    @property
    def sequence_length(self) -> int:
        return self.latent_resolution**3

    @property
    def context(self) -> int:
        # sequence plus the SOS prefix
        return self.sequence_length + 1

    @property
    def vocab(self) -> int:
        # codebook entries + SOS + MASK
        return self.codebook_size + 2


class Block(nn.Module):
    def __init__(self, width: int, n_heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(width)
        self.qkv = nn.Linear(width, 3 * width)
        self.proj = nn.Linear(width, width)
        self.ln2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, 4 * width), nn.GELU(), nn.Linear(4 * width, width)
        )
        self.n_heads = n_heads

    def forward(self, x):
        b, t, w = x.shape
        q, k, v = self.qkv(self.ln1(x)).chunk(3, dim=-1)
        shape = (b, t, self.n_heads, w // self.n_heads)
        q, k, v = (u.view(shape).transpose(1, 2) for u in (q, k, v))
        att = F.scaled_dot_product_attention(q, k, v, is_causal=True)
        att = att.transpose(1, 2).reshape(b, t, w)
        x = x + self.proj(att)
        return x + self.mlp(self.ln2(x))


class MiniGpt(nn.Module):
    """Causal transformer; logits cover the K codebook classes only.

    The classification head is zero-initialized, so an untrained model
    emits uniform logits and a per-token NLL of exactly ln(K).
    """

    def __init__(self, config: PriorConfig):
        super().__init__()
        torch.manual_seed(config.seed)
        self.config = config
        self.tok_emb = nn.Embedding(config.vocab, config.width)
        self.pos_emb = nn.Parameter(torch.zeros(1, config.context, config.width))
        nn.init.normal_(self.pos_emb, std=0.02)
        self.blocks = nn.ModuleList(
            Block(config.width, config.n_heads) for _ in range(config.n_layers)
        )
        self.ln_f = nn.LayerNorm(config.width)
        self.head = nn.Linear(config.width, config.codebook_size)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        """Next-token logits, (B, T, K), for input token ids (B, T)."""
        if tokens.ndim != 2 or tokens.shape[1] > self.config.context:
            raise ValueError(
                f"expected (B, T<= {self.config.context}), got {tuple(tokens.shape)}"
            )
        if int(tokens.max()) >= self.config.vocab:
            raise ValueError("token id outside vocabulary")
        x = self.tok_emb(tokens) + self.pos_emb[:, : tokens.shape[1]]
        for block in self.blocks:
            x = block(x)
        return self.head(self.ln_f(x))

    @torch.no_grad()
    def initial_nll(self) -> float:
        """Analytic per-token NLL of the untrained uniform head."""
        return math.log(self.config.codebook_size)

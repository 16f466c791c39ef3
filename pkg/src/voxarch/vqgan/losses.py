"""The four-term training objective and its adversarial pieces."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch.nn import functional as F

from .perceptual import perceptual_25d
from .quantize import commitment_loss

__all__ = [
    "LossWeights",
    "LossBreakdown",
    "TrainingDivergence",
    "reconstruction_loss",
    "generator_adversarial",
    "discriminator_loss",
    "combine_losses",
    "compute_losses",
]


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 100.0  # reconstruction
    beta: float = 10.0  # 2.5D perceptual
    gamma: float = 0.25  # commitment
    delta: float = 0.1  # adversarial

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class LossBreakdown:
    l_r: torch.Tensor
    l_p25: torch.Tensor
    l_c: torch.Tensor
    l_d: torch.Tensor
    total: torch.Tensor

    def detach_floats(self) -> dict:
        return {
            "l_r": float(self.l_r.detach()),
            "l_p25": float(self.l_p25.detach()),
            "l_c": float(self.l_c.detach()),
            "l_d": float(self.l_d.detach()),
            "total": float(self.total.detach()),
        }


class TrainingDivergence(RuntimeError):
    """Raised when a loss goes non-finite; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def reconstruction_loss(v: torch.Tensor, v_hat: torch.Tensor, kind: str = "bce") -> torch.Tensor:
    """Mean element-wise reconstruction error, BCE by default."""
    if kind == "bce":
        # torch clamps the log terms at -100, so saturated predictions stay finite
        return F.binary_cross_entropy(v_hat, v)
    if kind == "l1":
        return torch.mean(torch.abs(v - v_hat))
    raise ValueError(f"unknown reconstruction loss {kind!r}")


def generator_adversarial(logits_fake: torch.Tensor, kind: str = "hinge") -> torch.Tensor:
    if kind == "hinge":
        return -logits_fake.mean()
    if kind == "vanilla":
        return F.softplus(-logits_fake).mean()
    raise ValueError(f"unknown adversarial loss {kind!r}")


def discriminator_loss(
    logits_real: torch.Tensor, logits_fake: torch.Tensor, kind: str = "hinge"
) -> torch.Tensor:
    if kind == "hinge":
        return F.relu(1.0 - logits_real).mean() + F.relu(1.0 + logits_fake).mean()
    if kind == "vanilla":
        return F.softplus(-logits_real).mean() + F.softplus(logits_fake).mean()
    raise ValueError(f"unknown adversarial loss {kind!r}")


def combine_losses(weights: LossWeights, l_r, l_p25, l_c, l_d):
    """total = alpha*L_R + beta*L_P25 + gamma*L_C + delta*L_D."""
    return weights.alpha * l_r + weights.beta * l_p25 + weights.gamma * l_c + weights.delta * l_d


def compute_losses(
    v: torch.Tensor,
    v_hat: torch.Tensor,
    latent: torch.Tensor,
    codes: torch.Tensor,
    logits_fake: torch.Tensor | None,
    weights: LossWeights,
    extractor=None,
    recon: str = "bce",
    adversarial: str = "hinge",
    delta_scale: float = 1.0,
    context: dict | None = None,
) -> LossBreakdown:
    """Generator-side loss components and their weighted total.

    ``delta_scale`` ramps the adversarial weight in early training;
    ``logits_fake=None`` (or beta/extractor absent) skips the matching
    term. Non-finite totals raise TrainingDivergence with diagnostics.
    """
    if not torch.isfinite(v_hat).all():
        raise TrainingDivergence("non-finite prediction", dict(context or {}))
    zero = v_hat.new_zeros(())
    l_r = reconstruction_loss(v, v_hat, kind=recon) if weights.alpha > 0 else zero
    l_c = commitment_loss(latent, codes) if weights.gamma > 0 else zero
    if weights.beta > 0 and extractor is not None:
        l_p25 = perceptual_25d(v, v_hat, extractor)
    else:
        l_p25 = zero
    if weights.delta > 0 and delta_scale > 0 and logits_fake is not None:
        l_d = generator_adversarial(logits_fake, kind=adversarial)
    else:
        l_d = zero
    effective = LossWeights(
        alpha=weights.alpha,
        beta=weights.beta,
        gamma=weights.gamma,
        delta=weights.delta * delta_scale,
    )
    total = combine_losses(effective, l_r, l_p25, l_c, l_d)
    if not torch.isfinite(total):
        diag = {"l_r": float(l_r), "l_p25": float(l_p25), "l_c": float(l_c), "l_d": float(l_d)}
        diag.update(context or {})
        raise TrainingDivergence("non-finite training loss", diag)
    return LossBreakdown(l_r=l_r, l_p25=l_p25, l_c=l_c, l_d=l_d, total=total)

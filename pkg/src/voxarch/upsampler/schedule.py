"""Linear noise schedule and the closed-form forward corruption."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

__all__ = ["NoiseSchedule", "make_schedule", "forward_diffuse"]


@dataclass(frozen=True)
class NoiseSchedule:
    """Betas for t = 1..T plus cumulative products; alpha_bar(0) = 1."""

    betas: np.ndarray  # shape (T,), betas[t-1] is beta_t
    alpha_bars: np.ndarray = field(init=False)  # shape (T+1,), index by t

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("betas must be a non-empty 1-d array")
        if betas[0] <= 0 or betas[-1] >= 1 or np.any(np.diff(betas) < 0):
            raise ValueError("need 0 < beta_1 <= ... <= beta_T < 1")
        object.__setattr__(self, "betas", betas)
        bars = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
        object.__setattr__(self, "alpha_bars", bars)

    @property
    def T(self) -> int:
        return self.betas.size

    def alpha_bar(self, t) -> np.ndarray:
        """Cumulative alpha at step(s) t, t in [0, T]."""
        t = np.asarray(t)
        if np.any(t < 0) or np.any(t > self.T):
            raise ValueError(f"t must lie in [0, {self.T}]")
        return self.alpha_bars[t]


def make_schedule(T: int = 1000, beta_1: float = 1e-4, beta_T: float = 0.02) -> NoiseSchedule:
    """Linear interpolation from beta_1 to beta_T over T steps."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0 < beta_1 <= beta_T < 1:
        raise ValueError("need 0 < beta_1 <= beta_T < 1")
    return NoiseSchedule(np.linspace(beta_1, beta_T, T))


def forward_diffuse(x0: torch.Tensor, t, noise: torch.Tensor, schedule: NoiseSchedule):
    """x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.

    ``x0`` is a +-1 scaled field; ``t`` is an int or per-sample int array
    in [1, T] (t=0 is allowed and returns x0 exactly).
    """
    ab = schedule.alpha_bar(t)
    ab_t = torch.as_tensor(ab, dtype=x0.dtype)
    while ab_t.ndim < x0.ndim:
        ab_t = ab_t.unsqueeze(-1)
    return torch.sqrt(ab_t) * x0 + torch.sqrt(1.0 - ab_t) * noise

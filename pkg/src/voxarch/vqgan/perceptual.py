"""2.5D perceptual loss: frozen 2D features over axis-aligned projections.

The default extractor is a small frozen convolutional network with
deterministic seeded random weights, so the loss is a reproducible
feature-space distance without any downloaded weights. A VGG16 backbone
can be swapped in by pointing ARCH_VGG16_WEIGHTS at a local torchvision
state dict.
"""

from __future__ import annotations

import os

import torch
from torch import nn
from torch.nn import functional as F

__all__ = [
    "RandomFeatureExtractor",
    "Vgg16Extractor",
    "default_extractor",
    "perceptual_25d",
]

VGG16_ENV = "ARCH_VGG16_WEIGHTS"


class RandomFeatureExtractor(nn.Module):
    """Four frozen stride-2 conv blocks with seeded Gaussian weights.

    Post-activation features of every block are returned. Input statistics
    are mean 0.5 / std 0.5 per channel; the native input size is 64.
    """

    native_size = 64
    mean = 0.5
    std = 0.5

    def __init__(self, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        blocks = []
        c_in = 3
        for c_out in (16, 32, 64, 64):
            conv = nn.Conv2d(c_in, c_out, 3, stride=2, padding=1)
            with torch.no_grad():
                fan_in = c_in * 9
                conv.weight.copy_(torch.randn(conv.weight.shape, generator=gen) / fan_in**0.5)
                conv.bias.zero_()
            blocks.append(conv)
            c_in = c_out
        self.blocks = nn.ModuleList(blocks)
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, x: torch.Tensor) -> list:
        feats = []
        for conv in self.blocks:
            x = F.relu(conv(x))
            feats.append(x)
        return feats


class Vgg16Extractor(nn.Module):
    """VGG16 features at the first four post-activation blocks.

    Weights are loaded from a local file; nothing is downloaded.
    """

    native_size = 224
    mean = (0.485, 0.456, 0.406)
    std = (0.229, 0.224, 0.225)

    # indices after relu1_2, relu2_2, relu3_3, relu4_3 in vgg16().features
    _taps = (4, 9, 16, 23)

    def __init__(self, weights_path: str):
        super().__init__()
        try:
            from torchvision.models import vgg16
        except ImportError as exc:  # pragma: no cover - torchvision is normally present
            raise RuntimeError("torchvision is required for the VGG16 extractor") from exc
        model = vgg16()
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
        self.features = model.features[: self._taps[-1]]
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, x: torch.Tensor) -> list:
        feats = []
        for i, layer in enumerate(self.features):
            x = layer(x)
            if i + 1 in self._taps:
                feats.append(x)
        return feats


def default_extractor(seed: int = 0) -> nn.Module:
    """VGG16 if ARCH_VGG16_WEIGHTS points at weights, else the frozen random net."""
    path = os.environ.get(VGG16_ENV, "")
    if path:
        return Vgg16Extractor(path)
    return RandomFeatureExtractor(seed=seed)


def _prepare(plane: torch.Tensor, extractor: nn.Module) -> torch.Tensor:
    # (B, 1, H, W) map -> replicated 3-channel, resized, normalized input
    x = plane.expand(-1, 3, -1, -1)
    size = extractor.native_size
    if x.shape[-1] != size or x.shape[-2] != size:
        x = F.interpolate(x, size=(size, size), mode="bilinear", align_corners=False)
    mean = torch.as_tensor(extractor.mean, dtype=x.dtype).view(1, -1, 1, 1)
    std = torch.as_tensor(extractor.std, dtype=x.dtype).view(1, -1, 1, 1)
    return (x - mean) / std


def perceptual_25d(
    v: torch.Tensor,
    v_hat: torch.Tensor,
    extractor: nn.Module,
    layer_weights=None,
) -> torch.Tensor:
    """Average feature distance over the three mean projections.

    Both inputs are (B, 1, R, R, R) fields. Each is averaged along each
    spatial axis, the resulting three map pairs are fed to the frozen
    extractor, and per-layer mean squared activation differences are
    summed with uniform weights by default.
    """
    if v.shape != v_hat.shape:
        raise ValueError("shape mismatch between target and prediction")
    total = v.new_zeros(())
    for dim in (2, 3, 4):
        pa = _prepare(v.mean(dim=dim), extractor)
        pb = _prepare(v_hat.mean(dim=dim), extractor)
        feats_a = extractor(pa)
        feats_b = extractor(pb)
        if layer_weights is None:
            weights = [1.0] * len(feats_a)
        else:
            weights = list(layer_weights)
        for w, fa, fb in zip(weights, feats_a, feats_b):
            total = total + w * torch.mean((fa - fb) ** 2)
    return total / 3.0

"""Flat key=value run configuration with desk- and full-scale presets.

The format is a plain text file of ``key = value`` lines. Values are
coerced to bool/int/float when they parse as one; everything else stays
a string. ``#`` starts a comment.
"""

from __future__ import annotations

from pathlib import Path

__all__ = [
    "SCENE_EXTENT",
    "parse_config",
    "load_config",
    "format_config",
    "save_config",
    "preset",
    "PRESETS",
]

# houses occupy a fixed physical cube; voxel size is extent / resolution
SCENE_EXTENT = 48.0

_BOOLS = {"true": True, "false": False}


def _coerce(raw: str):
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    low = text.lower()
    if low in _BOOLS:
        return _BOOLS[low]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into a flat dict."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key = value, got {line.strip()!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(raw)
    return values


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


def format_config(values: dict) -> str:
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def save_config(path, values: dict) -> None:
    Path(path).write_text(format_config(values))


# Full scale mirrors the published pipeline sizes; desk scale shrinks every
# stage so the whole pipeline trains in minutes on one CPU.
_FULL = {
    "data.count": 64,
    "data.resolution": 64,
    "data.chunks_per_model": 16,
    "vqgan.base_channels": 32,
    "vqgan.codebook_size": 512,
    "vqgan.embed_dim": 128,
    "vqgan.epochs": 128,
    "vqgan.batch_size": 4,
    "prior.layers": 8,
    "prior.heads": 8,
    "prior.width": 256,
    "prior.epochs": 128,
    "prior.batch_size": 32,
    "upsampler.base_channels": 32,
    "upsampler.epochs": 256,
    "upsampler.batch_size": 32,
    "upsampler.T": 1000,
    "sample.top_k": 32,
    "sample.temperature": 1.0,
}

_DESK = {
    "data.count": 8,
    "data.resolution": 32,
    "data.chunks_per_model": 4,
    "vqgan.base_channels": 16,
    "vqgan.codebook_size": 64,
    "vqgan.embed_dim": 32,
    "vqgan.epochs": 64,
    "vqgan.batch_size": 4,
    "prior.layers": 4,
    "prior.heads": 4,
    "prior.width": 128,
    "prior.epochs": 64,
    "prior.batch_size": 8,
    "upsampler.base_channels": 16,
    "upsampler.epochs": 32,
    "upsampler.batch_size": 8,
    "upsampler.T": 1000,
    "sample.top_k": 32,
    "sample.temperature": 1.0,
}

PRESETS = {"full": _FULL, "desk": _DESK}


def preset(name: str = "full") -> dict:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return dict(PRESETS[name])

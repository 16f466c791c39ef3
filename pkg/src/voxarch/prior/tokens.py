"""Token sequences over quantized index maps.

The raster order is fixed: x fastest, then y, then z. A sequence of an
r-cubed index map therefore has length r**3 and every token lies in
[0, K). The SOS id is K; the MASK id used during training is K + 1.
"""

from __future__ import annotations

import json

import numpy as np

__all__ = [
    "tokenize",
    "detokenize",
    "sequence_to_json",
    "sequence_from_json",
    "sos_id",
    "mask_id",
    "half_known_mask",
]

ORDER = "xyz-raster"


def sos_id(codebook_size: int) -> int:
    return codebook_size


def mask_id(codebook_size: int) -> int:
    return codebook_size + 1


def tokenize(index_map: np.ndarray) -> np.ndarray:
    """Flatten an (r, r, r) index map x-fastest into a token sequence."""
    arr = np.asarray(index_map, dtype=np.int64)
    if arr.ndim != 3 or len(set(arr.shape)) != 1:
        raise ValueError(f"index map must be cubic, got {arr.shape}")
    return arr.ravel(order="F").copy()


def detokenize(sequence, r: int | None = None) -> np.ndarray:
    """Inverse of :func:`tokenize`; returns the (r, r, r) index map."""
    seq = np.asarray(sequence, dtype=np.int64).ravel()
    if r is None:
        r = round(len(seq) ** (1 / 3))
    if r**3 != len(seq):
        raise ValueError(f"sequence length {len(seq)} is not a cube")
    return seq.reshape((r, r, r), order="F").copy()


def sequence_to_json(sequence, codebook_size: int) -> str:
    seq = np.asarray(sequence, dtype=np.int64).ravel()
    if seq.size and (seq.min() < 0 or seq.max() >= codebook_size):
        raise ValueError("token outside [0, K)")
    r = round(len(seq) ** (1 / 3))
    payload = {"K": codebook_size, "r": r, "order": ORDER, "tokens": seq.tolist()}
    return json.dumps(payload)


def sequence_from_json(text: str) -> tuple[np.ndarray, int]:
    """Parse a sequence payload, returning (tokens, K)."""
    payload = json.loads(text)
    if payload.get("order") != ORDER:
        raise ValueError(f"unsupported token order {payload.get('order')!r}")
    k = int(payload["K"])
    tokens = np.asarray(payload["tokens"], dtype=np.int64)
    if tokens.size and (tokens.min() < 0 or tokens.max() >= k):
        raise ValueError("token outside [0, K)")
    return tokens, k


def half_known_mask(r: int, half: str) -> np.ndarray:
    """Known-cell mask keeping the half opposite to ``half``.

    ``half`` names the half being completed; e.g. "x+" hides cells with
    the upper x indices and keeps the x- half as context.
    """
    if len(half) != 2 or half[0] not in "xyz" or half[1] not in "+-":
        raise ValueError(f"half must be one of x+/x-/y+/y-/z+/z-, got {half!r}")
    axis = "xyz".index(half[0])
    known = np.ones((r, r, r), dtype=bool)
    sel = [slice(None)] * 3
    sel[axis] = slice(r // 2, r) if half[1] == "+" else slice(0, r // 2)
    known[tuple(sel)] = False
    return known

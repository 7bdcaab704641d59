"""Writers for the VFTS feature-stack and VFTW weight file formats.

Both are little-endian. VFTS: magic ``VFTS``, version u32=1, extractor_id
as u16 length + UTF-8 bytes, layer_count u32, then per layer C, H, W as
u32 followed by C*H*W f32 values in (c, h, w) order. VFTW: magic ``VFTW``,
version u32=1, layer_count u32, per layer C u32 + C f32 weights.

This module deliberately duplicates the format instead of importing the
consumer package: the two sides share only the bytes on disk.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_feature_stack(layers: list[np.ndarray], extractor_id: str, path: str | Path) -> None:
    """Write float32 (C, H, W) layer arrays as one VFTS file, atomically."""
    parts = [b"VFTS", struct.pack("<I", 1)]
    ident = extractor_id.encode("utf-8")
    parts.append(struct.pack("<H", len(ident)))
    parts.append(ident)
    parts.append(struct.pack("<I", len(layers)))
    for layer in layers:
        if layer.ndim != 3:
            raise ValueError(f"layer must be (C,H,W), got {layer.shape}")
        c, h, w = layer.shape
        parts.append(struct.pack("<III", c, h, w))
        parts.append(np.ascontiguousarray(layer, dtype="<f4").tobytes())
    _atomic_write(Path(path), b"".join(parts))


def write_lpips_weights(layers: list[np.ndarray], path: str | Path) -> None:
    """Write per-layer channel weight vectors as one VFTW file, atomically."""
    parts = [b"VFTW", struct.pack("<I", 1), struct.pack("<I", len(layers))]
    for w in layers:
        parts.append(struct.pack("<I", len(w)))
        parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
    _atomic_write(Path(path), b"".join(parts))

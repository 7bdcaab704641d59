"""Binary feature-tensor (VFTS) and layer-weight (VFTW) file formats.

Both formats are little-endian. VFTS: magic ``VFTS``, version u32=1,
extractor_id as u16 length + UTF-8 bytes, layer_count u32, then per layer
C, H, W as u32 followed by C*H*W f32 values in (c, h, w) order. VFTW:
magic ``VFTW``, version u32=1, layer_count u32, per layer C u32 + C f32
weights.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import BadMagic, ShapeMismatch, ShapeOverflow, TruncatedFile

# guards header-declared sizes against corrupt files (2^31 floats = 8 GiB)
_MAX_ELEMENTS = 2 ** 31


@dataclass(frozen=True)
class FeatureMap:
    """One layer's activations, shape (C, H, W), float32."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] < 1:
            raise ShapeMismatch(f"feature map must be (C,H,W), got {self.data.shape}")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class FeatureStack:
    """Ordered deep-feature layers for one image."""

    layers: tuple[FeatureMap, ...]
    extractor_id: str

    def __post_init__(self):
        if not self.layers:
            raise ShapeMismatch("a feature stack needs at least one layer")


@dataclass(frozen=True)
class LpipsWeights:
    """Per-layer non-negative channel weights for the perceptual distance."""

    layers: tuple[np.ndarray, ...]


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFile(f"{self.path}: expected {n} more bytes at offset {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def write_feature_stack(stack: FeatureStack, path: str | Path) -> None:
    parts = [b"VFTS", struct.pack("<I", 1)]
    ident = stack.extractor_id.encode("utf-8")
    parts.append(struct.pack("<H", len(ident)))
    parts.append(ident)
    parts.append(struct.pack("<I", len(stack.layers)))
    for layer in stack.layers:
        c, h, w = layer.data.shape
        parts.append(struct.pack("<III", c, h, w))
        parts.append(np.ascontiguousarray(layer.data, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_feature_stack(path: str | Path) -> FeatureStack:
    path = Path(path)
    r = _Reader(path.read_bytes(), str(path))
    if r.take(4) != b"VFTS":
        raise BadMagic(f"{path}: not a VFTS file")
    version = r.u32()
    if version != 1:
        raise BadMagic(f"{path}: unsupported VFTS version {version}")
    ident = r.take(r.u16()).decode("utf-8")
    layer_count = r.u32()
    layers = []
    for _ in range(layer_count):
        c, h, w = r.u32(), r.u32(), r.u32()
        n = c * h * w
        if c < 1 or n > _MAX_ELEMENTS:
            raise ShapeOverflow(f"{path}: layer shape ({c},{h},{w}) out of range")
        raw = r.take(4 * n)
        data = np.frombuffer(raw, dtype="<f4").reshape(c, h, w).astype(np.float32)
        layers.append(FeatureMap(data=data))
    return FeatureStack(layers=tuple(layers), extractor_id=ident)


def write_lpips_weights(weights: LpipsWeights, path: str | Path) -> None:
    parts = [b"VFTW", struct.pack("<I", 1), struct.pack("<I", len(weights.layers))]
    for w in weights.layers:
        parts.append(struct.pack("<I", len(w)))
        parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_lpips_weights(path: str | Path) -> LpipsWeights:
    path = Path(path)
    r = _Reader(path.read_bytes(), str(path))
    if r.take(4) != b"VFTW":
        raise BadMagic(f"{path}: not a VFTW file")
    version = r.u32()
    if version != 1:
        raise BadMagic(f"{path}: unsupported VFTW version {version}")
    layer_count = r.u32()
    layers = []
    for _ in range(layer_count):
        c = r.u32()
        if c < 1 or c > _MAX_ELEMENTS:
            raise ShapeOverflow(f"{path}: weight length {c} out of range")
        layers.append(np.frombuffer(r.take(4 * c), dtype="<f4").astype(np.float32))
    return LpipsWeights(layers=tuple(layers))

"""JPEG modification harness and compression-factor accounting.

Encoding goes through Pillow (libjpeg), i.e. the standard Annex-K
quantization tables under the libjpeg quality scaling. The numerator of the
compression factor is the uncompressed 8-bit pixel size (width * height *
channels), not the source file size, so the factor is codec-independent.
"""

from __future__ import annotations

import io
import math
import logging
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from .errors import EmptySweep, EncodeError, QualityOutOfRange, ZeroEncodedSize
from .manifest import ImageRecord, read_image_record

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompressionStats:
    """Compression-factor statistics for one quality level over a corpus."""

    quality: int
    factor_mean: float
    factor_std: float
    n: int


def _check_quality(quality: int) -> None:
    if not isinstance(quality, int) or not 1 <= quality <= 100:
        raise QualityOutOfRange(f"JPEG quality must be an int in [1, 100], got {quality!r}")


def _encode_jpeg(im: Image.Image, quality: int) -> bytes:
    # 4:4:4 at high quality keeps chroma artifacts out of the near-lossless
    # settings; 4:2:0 below matches common encoder defaults.
    subsampling = 0 if quality >= 90 else 2
    buf = io.BytesIO()
    try:
        im.save(buf, format="JPEG", quality=quality, subsampling=subsampling)
    except OSError as exc:
        raise EncodeError(str(exc)) from exc
    return buf.getvalue()


def _open_for_encode(path: str | Path) -> Image.Image:
    im = Image.open(path)
    if im.mode not in ("L", "RGB"):
        im = im.convert("RGB" if im.mode in ("RGBA", "P") else "L")
    return im


def apply_jpeg(image: ImageRecord, quality: int, out_path: str | Path) -> ImageRecord:
    """Encode one image as baseline JPEG at the given quality level."""
    _check_quality(quality)
    im = _open_for_encode(image.path)
    data = _encode_jpeg(im, quality)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(data)
    return read_image_record(out_path)


def compression_factor(raw_bytes: int, encoded_bytes: int) -> float:
    """Uncompressed pixel bytes divided by encoded bytes."""
    if encoded_bytes <= 0:
        raise ZeroEncodedSize("encoded size must be positive")
    return raw_bytes / encoded_bytes


def sweep(ref_dir: str | Path, qualities: list[int]) -> list[CompressionStats]:
    """Encode every image under ref_dir at each quality and collect factors.

    Returns one CompressionStats per quality, in the given order.
    Statistics use the population standard deviation (n=1 gives std 0).
    """
    if not qualities:
        raise EmptySweep("at least one quality level is required")
    for q in qualities:
        _check_quality(q)

    ref_dir = Path(ref_dir)
    paths = sorted(
        p for p in ref_dir.rglob("*")
        if p.is_file() and p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    stats = []
    for q in qualities:
        factors = []
        for path in paths:
            im = _open_for_encode(path)
            channels = 3 if im.mode == "RGB" else 1
            raw = im.width * im.height * channels
            encoded = len(_encode_jpeg(im, q))
            factors.append(compression_factor(raw, encoded))
        n = len(factors)
        if n == 0:
            raise EmptySweep(f"no images found under {ref_dir}")
        mean = sum(factors) / n
        var = sum((f - mean) ** 2 for f in factors) / n
        stats.append(CompressionStats(quality=q, factor_mean=mean, factor_std=math.sqrt(var), n=n))
    return stats


def write_sweep_csv(stats: list[CompressionStats], path: str | Path) -> None:
    lines = ["quality,n,factor_mean,factor_std"]
    for s in stats:
        lines.append(f"{s.quality},{s.n},{s.factor_mean:.6f},{s.factor_std:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

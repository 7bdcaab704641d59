"""Batch feature extraction: one VFTS file per image, plus spec.json."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from . import fileio
from .errors import ModelLoadError
from .model import LAYER_CHANNELS, Extractor
from .spec import ExtractorSpec

log = logging.getLogger("valimetrics_sidecar")

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def _load_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def extract(image_dir: str | Path, spec: ExtractorSpec, out_dir: str | Path,
            failures: list | None = None) -> list[Path]:
    """Run the extractor over every image in ``image_dir``.

    Writes ``<stem>.vfts`` per image and a ``spec.json`` manifest into
    ``out_dir``. Per-image failures are logged, recorded in ``failures``
    when a list is passed, and skipped. Returns the written VFTS paths in
    sorted input order.
    """
    image_dir = Path(image_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    extractor = Extractor(spec)

    images = sorted(p for p in image_dir.iterdir()
                    if p.suffix.lower() in IMAGE_SUFFIXES)
    written: list[Path] = []
    for img_path in images:
        try:
            rgb = _load_rgb(img_path)
            layers = extractor.run(rgb)
        except ModelLoadError:
            raise
        except Exception as exc:
            log.warning("skipping %s: %s", img_path.name, exc)
            if failures is not None:
                failures.append((img_path, exc))
            continue
        out_path = out_dir / (img_path.stem + ".vfts")
        fileio.write_feature_stack(layers, spec.extractor_id, out_path)
        written.append(out_path)

    (out_dir / "spec.json").write_text(
        json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    return written


def export_lpips_weights(spec: ExtractorSpec, out: str | Path,
                         calibration: str = "uniform") -> Path:
    """Write a VFTW weight file matching the spec's layer channel counts.

    Only ``calibration="uniform"`` (all-ones, identity weighting) ships
    with this package; calibrated linear weights would need a fitting run
    against human judgments that no supported network bundles.
    """
    if calibration != "uniform":
        raise ModelLoadError(
            f"no {calibration!r} weights available for {spec.network}; "
            "only uniform weighting ships with this package")
    channels = LAYER_CHANNELS[spec.network]
    layers = [np.ones(channels[name], dtype=np.float32) for name in spec.layers]
    out = Path(out)
    fileio.write_lpips_weights(layers, out)
    return out

"""Synthetic demo corpora: photo-like images, JPEG-modified counterparts,
and detection/mask sets whose disagreement grows with pixel error.

Everything is driven by a seeded numpy Generator, so a corpus is a pure
function of (seed, n, sizes) and reruns are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

from .modification import _encode_jpeg
from .quality import mse

DEFAULT_QUALITIES = (90, 50, 30, 15, 5)


def make_photo(rng: np.random.Generator, height: int = 96, width: int = 128,
               texture: float = 1.0) -> np.ndarray:
    """One photo-like uint8 RGB image: sky/ground gradient, soft blobs,
    a few hard-edged shapes, and band-limited texture noise."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    top = rng.uniform(90, 200, size=3)
    bottom = rng.uniform(30, 140, size=3)
    for c in range(3):
        img[..., c] = top[c] + (bottom[c] - top[c]) * yy / height

    for _ in range(rng.integers(2, 5)):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        r = rng.uniform(8, 30)
        blob = np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r ** 2)))
        img += blob[..., None] * rng.uniform(-60, 60, size=3)

    for _ in range(rng.integers(2, 6)):
        y0 = rng.integers(0, height - 8)
        x0 = rng.integers(0, width - 8)
        h = rng.integers(6, max(7, height // 3))
        w = rng.integers(6, max(7, width // 3))
        img[y0:y0 + h, x0:x0 + w] += rng.uniform(-70, 70, size=3)

    noise = rng.normal(0, 1, size=(height, width, 3))
    smooth = gaussian_filter(noise, sigma=(1.2, 1.2, 0))
    img += smooth * 18.0 * texture
    img = np.clip(img, 0, 255)
    if rng.random() < 0.5:
        # coarse tonal palette: encoding re-introduces intermediate levels,
        # so the entropy of these images moves independently of error level
        step = float(rng.integers(12, 40))
        img = np.round(img / step) * step
    return np.clip(img, 0, 255).astype(np.uint8)


def build_photo_dir(out_dir: str | Path, n: int, seed: int,
                    height: int = 96, width: int = 128) -> list[Path]:
    """Write n photo-like PNGs with varying texture levels."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n):
        texture = rng.uniform(0.2, 3.0)
        img = make_photo(rng, height, width, texture=texture)
        p = out_dir / f"{i:06d}.png"
        Image.fromarray(img).save(p)
        paths.append(p)
    return paths


def build_pair_corpus(
    out_dir: str | Path,
    n: int = 100,
    seed: int = 0,
    qualities: tuple[int, ...] = DEFAULT_QUALITIES,
    height: int = 96,
    width: int = 128,
) -> dict:
    """Reference PNGs plus JPEG-modified counterparts at mixed qualities,
    and synthetic detection/mask sets perturbed proportionally to the
    pair's pixel error.

    Layout: ref/, mod/, ref_pred.json, mod_pred.json, ref_masks/, mod_masks/.
    Returns a summary dict with per-pair quality levels.
    """
    out_dir = Path(out_dir)
    ref_dir = out_dir / "ref"
    mod_dir = out_dir / "mod"
    ref_mask_dir = out_dir / "ref_masks"
    mod_mask_dir = out_dir / "mod_masks"
    for d in (ref_dir, mod_dir, ref_mask_dir, mod_mask_dir):
        d.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    ref_entries, mod_entries = [], []
    per_pair = {}
    for i in range(n):
        pair_id = f"{i:06d}"
        texture = rng.uniform(0.2, 3.0)
        img = make_photo(rng, height, width, texture=texture)
        Image.fromarray(img).save(ref_dir / f"{pair_id}.png")

        quality = int(qualities[i % len(qualities)])
        data = _encode_jpeg(Image.fromarray(img), quality)
        (mod_dir / f"{pair_id}.jpg").write_bytes(data)
        with Image.open(mod_dir / f"{pair_id}.jpg") as jm:
            decoded = np.asarray(jm, dtype=np.float64)
        err = mse(img.astype(np.float64), decoded)
        per_pair[pair_id] = {"quality": quality, "mse": err}

        # detections: boxes survive compression imperfectly, drifting by an
        # offset proportional to the pixel error
        shift = 0.04 * err
        n_boxes = int(rng.integers(3, 7))
        for b in range(n_boxes):
            bw = float(rng.uniform(12, 40))
            bh = float(rng.uniform(12, 40))
            x0 = float(rng.uniform(0, width - bw))
            y0 = float(rng.uniform(0, height - bh))
            cls = int(rng.integers(0, 3))
            score = float(rng.uniform(0.4, 1.0))
            ref_entries.append({
                "image_id": pair_id, "class_id": cls,
                "bbox": [x0, y0, x0 + bw, y0 + bh], "score": round(score, 4),
            })
            dx = shift * float(rng.choice([-1.0, 1.0]))
            dy = shift * float(rng.choice([-1.0, 1.0]))
            mod_entries.append({
                "image_id": pair_id, "class_id": cls,
                "bbox": [x0 + dx, y0 + dy, x0 + bw + dx, y0 + bh + dy],
                "score": round(float(np.clip(score + rng.normal(0, 0.02), 0.01, 1.0)), 4),
            })

        # masks: class regions shrink/shift with the same error budget
        ref_mask = np.zeros((height, width), dtype=np.uint8)
        for c in (1, 2):
            my0 = int(rng.integers(0, height // 2))
            mx0 = int(rng.integers(0, width // 2))
            mh = int(rng.integers(height // 4, height // 2))
            mw = int(rng.integers(width // 4, width // 2))
            ref_mask[my0:my0 + mh, mx0:mx0 + mw] = c
        pixel_shift = int(round(shift))
        mod_mask = np.roll(ref_mask, (pixel_shift, pixel_shift), axis=(0, 1))
        Image.fromarray(ref_mask).save(ref_mask_dir / f"{pair_id}.png")
        Image.fromarray(mod_mask).save(mod_mask_dir / f"{pair_id}.png")

    (out_dir / "ref_pred.json").write_text(
        json.dumps(ref_entries, indent=1) + "\n", encoding="utf-8")
    (out_dir / "mod_pred.json").write_text(
        json.dumps(mod_entries, indent=1) + "\n", encoding="utf-8")
    return {"n": n, "seed": seed, "qualities": list(qualities), "pairs": per_pair}

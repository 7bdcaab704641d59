"""Segmentation agreement metrics: the reference image's class mask is the
ground truth, so 1.0 means identical pixel-level behavior.

Masks are single-channel uint8 arrays; value 255 in the reference marks
ignore pixels, which are excluded from every count.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import AllIgnored, DecodeError, DimensionMismatch

IGNORE = 255


@dataclass(frozen=True)
class SegScores:
    mean_dice: float
    mean_iou: float
    mean_pixel_acc: float
    global_pixel_acc: float  # auxiliary: plain fraction of agreeing pixels


def load_class_mask(path: str | Path) -> np.ndarray:
    """Read a single-channel 8-bit PNG as a class-index mask."""
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise DecodeError(f"{path}: mask must be single-channel 8-bit, got mode {im.mode}")
            return np.asarray(im, dtype=np.uint8)
    except OSError as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def seg_metrics(ref_mask: np.ndarray, mod_mask: np.ndarray) -> SegScores:
    """Per-class Dice/IoU averaged over the union of classes in either mask,
    and mean per-class pixel accuracy over classes present in the reference."""
    ref_mask = np.asarray(ref_mask)
    mod_mask = np.asarray(mod_mask)
    if ref_mask.shape != mod_mask.shape:
        raise DimensionMismatch(f"mask shape {ref_mask.shape} vs {mod_mask.shape}")
    valid = ref_mask != IGNORE
    if not valid.any():
        raise AllIgnored("every reference pixel is ignored")
    ref = ref_mask[valid].astype(np.int64)
    mod = mod_mask[valid].astype(np.int64)

    classes = sorted((set(np.unique(ref)) | set(np.unique(mod))) - {IGNORE})
    ref_classes = set(np.unique(ref)) - {IGNORE}

    dices, ious, accs = [], [], []
    for c in classes:
        in_ref = ref == c
        in_mod = mod == c
        inter = int(np.sum(in_ref & in_mod))
        n_ref = int(in_ref.sum())
        n_mod = int(in_mod.sum())
        union = n_ref + n_mod - inter
        dices.append(2.0 * inter / (n_ref + n_mod) if n_ref + n_mod else 0.0)
        ious.append(inter / union if union else 0.0)
        if c in ref_classes:
            accs.append(inter / n_ref)

    agree = float(np.mean(ref == mod))
    return SegScores(
        mean_dice=float(np.mean(dices)),
        mean_iou=float(np.mean(ious)),
        mean_pixel_acc=float(np.mean(accs)),
        global_pixel_acc=agree,
    )

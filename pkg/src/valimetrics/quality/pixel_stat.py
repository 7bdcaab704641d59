"""Pixel-level and statistical full-reference quality metrics.

All functions operate on 2-D float arrays with values in [0, 255]; color
inputs are reduced beforehand (MSE/PSNR average over channels, everything
else uses BT.601 luma, see `luma`).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import convolve2d

from ..errors import DimensionMismatch, ImageTooSmall, ZeroVariance

PSNR_INF = math.inf  # sentinel for identical images; excluded from correlation


def luma(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an (H, W, 3) array; 2-D arrays pass through."""
    a = np.asarray(rgb, dtype=np.float64)
    if a.ndim == 2:
        return a
    if a.ndim == 3 and a.shape[2] == 3:
        return a[..., 0] * 0.299 + a[..., 1] * 0.587 + a[..., 2] * 0.114
    if a.ndim == 3 and a.shape[2] == 1:
        return a[..., 0]
    raise DimensionMismatch(f"expected (H,W) or (H,W,3), got {a.shape}")


def _check_same_shape(ref: np.ndarray, mod: np.ndarray) -> None:
    if ref.shape != mod.shape:
        raise DimensionMismatch(f"shape {ref.shape} vs {mod.shape}")


def mse(ref: np.ndarray, mod: np.ndarray) -> float:
    """Mean squared pixel difference; multi-channel input averages channels."""
    ref = np.asarray(ref, dtype=np.float64)
    mod = np.asarray(mod, dtype=np.float64)
    _check_same_shape(ref, mod)
    return float(np.mean((ref - mod) ** 2))


def psnr(ref: np.ndarray, mod: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB against peak 255; inf when MSE is 0."""
    err = mse(ref, mod)
    if err == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(255.0 ** 2 / err)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


_SSIM_WINDOW = _gaussian_window()


def ssim(ref: np.ndarray, mod: np.ndarray) -> float:
    """Mean structural similarity, 11x11 Gaussian window sigma=1.5.

    Windows are taken at valid positions only (no padding), so the image
    must be at least 11 pixels on each side.
    """
    ref = np.asarray(ref, dtype=np.float64)
    mod = np.asarray(mod, dtype=np.float64)
    _check_same_shape(ref, mod)
    if min(ref.shape) < 11:
        raise ImageTooSmall(f"SSIM needs >= 11 px per side, got {ref.shape}")

    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    w = _SSIM_WINDOW

    mu1 = convolve2d(ref, w, mode="valid")
    mu2 = convolve2d(mod, w, mode="valid")
    mu1_sq, mu2_sq, mu12 = mu1 * mu1, mu2 * mu2, mu1 * mu2
    sigma1_sq = convolve2d(ref * ref, w, mode="valid") - mu1_sq
    sigma2_sq = convolve2d(mod * mod, w, mode="valid") - mu2_sq
    sigma12 = convolve2d(ref * mod, w, mode="valid") - mu12

    num = (2 * mu12 + c1) * (2 * sigma12 + c2)
    den = (mu1_sq + mu2_sq + c1) * (sigma1_sq + sigma2_sq + c2)
    return float(np.mean(num / den))


def ncc(ref: np.ndarray, mod: np.ndarray) -> float:
    """Zero-normalized global cross-correlation; invariant to affine
    brightness/contrast changes. Raises ZeroVariance on constant input."""
    ref = np.asarray(ref, dtype=np.float64)
    mod = np.asarray(mod, dtype=np.float64)
    _check_same_shape(ref, mod)
    r = ref - ref.mean()
    m = mod - mod.mean()
    sr = math.sqrt(float(np.mean(r * r)))
    sm = math.sqrt(float(np.mean(m * m)))
    if sr == 0.0 or sm == 0.0:
        raise ZeroVariance("NCC is undefined for a constant image")
    return float(np.clip(np.mean(r * m) / (sr * sm), -1.0, 1.0))


def histogram256(img: np.ndarray) -> np.ndarray:
    """Normalized 256-bin intensity histogram (bin k covers [k, k+1))."""
    img = np.asarray(img, dtype=np.float64)
    idx = np.clip(np.floor(img), 0, 255).astype(np.intp)
    counts = np.bincount(idx.ravel(), minlength=256).astype(np.float64)
    return counts / counts.sum()


def mutual_information(ref: np.ndarray, mod: np.ndarray) -> float:
    """Mutual information in bits over a 64x64 joint intensity histogram.

    Intensities are coarsened to 64 bins (bin = floor(v / 4)); full 256-bin
    joints are too sparse on small images and bias MI upward.
    """
    ref = np.asarray(ref, dtype=np.float64)
    mod = np.asarray(mod, dtype=np.float64)
    _check_same_shape(ref, mod)
    a = np.clip(np.floor(ref / 4.0), 0, 63).astype(np.intp).ravel()
    b = np.clip(np.floor(mod / 4.0), 0, 63).astype(np.intp).ravel()
    joint = np.bincount(a * 64 + b, minlength=64 * 64).astype(np.float64).reshape(64, 64)
    joint /= joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(pa, pb)
    return float(np.sum(joint[nz] * np.log2(joint[nz] / outer[nz])))


def emd(ref: np.ndarray, mod: np.ndarray) -> float:
    """1-D earth mover's distance between intensity histograms: the L1
    distance between the CDFs, with bin width one intensity level."""
    ref = np.asarray(ref, dtype=np.float64)
    mod = np.asarray(mod, dtype=np.float64)
    _check_same_shape(ref, mod)
    cdf_r = np.cumsum(histogram256(ref))
    cdf_m = np.cumsum(histogram256(mod))
    return float(np.sum(np.abs(cdf_r - cdf_m)))


def entropy(img: np.ndarray) -> float:
    """Shannon entropy in bits of the 256-bin intensity histogram."""
    p = histogram256(img)
    nz = p > 0
    return float(-np.sum(p[nz] * np.log2(p[nz])))


def entropy_delta(ref: np.ndarray, mod: np.ndarray) -> float:
    """Absolute difference of the two images' entropies."""
    return abs(entropy(ref) - entropy(mod))

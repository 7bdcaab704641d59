"""Feature-space quality metrics: perceptual distance, Fréchet distance,
cosine similarity.

The per-pair Fréchet score treats the spatial positions of one deep layer
as the sample set for each image, so the distribution-level formula yields
a well-defined per-pair scalar; shrinkage on the covariance handles rank
deficiency of small spatial grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DimensionMismatch,
    EigenFailure,
    ExtractorMismatch,
    ShapeMismatch,
    TooFewSamples,
    ZeroVector,
)
from .featurefile import FeatureMap, FeatureStack, LpipsWeights

_EIG_CLAMP_REL = 1e-8
_SHRINKAGE_EPS = 1e-6


@dataclass(frozen=True)
class GaussianSummary:
    """Mean and covariance of C-dimensional feature samples."""

    mean: np.ndarray
    cov: np.ndarray
    n_samples: int


def _unit_normalize_channels(data: np.ndarray) -> np.ndarray:
    """L2-normalize the channel vector at each spatial position.

    Positions with zero norm map to the zero vector.
    """
    norm = np.sqrt(np.sum(data ** 2, axis=0, keepdims=True))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(norm > 0, data / norm, 0.0)
    return out


def lpips(ref: FeatureStack, mod: FeatureStack, weights: LpipsWeights) -> float:
    """Weighted perceptual distance over channel-normalized deep features.

    Per layer: unit-normalize across channels at each position, take the
    weighted squared channel difference, average spatially, sum layers.
    """
    if ref.extractor_id != mod.extractor_id:
        raise ExtractorMismatch(f"{ref.extractor_id!r} vs {mod.extractor_id!r}")
    if len(ref.layers) != len(mod.layers) or len(ref.layers) != len(weights.layers):
        raise ShapeMismatch(
            f"layer counts differ: ref={len(ref.layers)} mod={len(mod.layers)} "
            f"weights={len(weights.layers)}"
        )
    total = 0.0
    for lr, lm, w in zip(ref.layers, mod.layers, weights.layers):
        if lr.data.shape != lm.data.shape:
            raise ShapeMismatch(f"layer shapes differ: {lr.data.shape} vs {lm.data.shape}")
        if len(w) != lr.channels:
            raise ShapeMismatch(f"weight length {len(w)} vs {lr.channels} channels")
        yr = _unit_normalize_channels(lr.data.astype(np.float64))
        ym = _unit_normalize_channels(lm.data.astype(np.float64))
        diff = (yr - ym) * w[:, None, None]
        total += float(np.sum(diff ** 2) / (lr.height * lr.width))
    return total


def gaussian_summary(fm: FeatureMap) -> GaussianSummary:
    """Moments over the H*W spatial samples of C-dimensional vectors.

    Covariance uses the 1/(n-1) convention plus diagonal shrinkage
    eps * tr(cov)/C with eps = 1e-6.
    """
    c = fm.channels
    n = fm.height * fm.width
    if n < 2:
        raise TooFewSamples(f"need >= 2 spatial samples, got {n}")
    samples = fm.data.reshape(c, n).T.astype(np.float64)
    mean = samples.mean(axis=0)
    centered = samples - mean
    cov = centered.T @ centered / (n - 1)
    cov = (cov + cov.T) / 2.0
    cov = cov + _SHRINKAGE_EPS * (np.trace(cov) / c) * np.eye(c)
    return GaussianSummary(mean=mean, cov=cov, n_samples=n)


def _psd_sqrt_eigvals(mat: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric PSD matrix, small negatives clamped to 0.

    Eigenvalues below -1e-8 * lambda_max signal corrupt input, not rounding.
    """
    vals = np.linalg.eigvalsh(mat)
    # the 1e-12 guard keeps all-zero matrices from tripping on rounding noise
    lam_max = max(float(vals.max()), 1e-12)
    floor = -_EIG_CLAMP_REL * lam_max
    if np.any(vals < floor):
        raise EigenFailure(f"eigenvalue {vals.min():.3e} below tolerance {floor:.3e}")
    return np.clip(vals, 0.0, None)


def frechet_distance(a: GaussianSummary, b: GaussianSummary) -> float:
    """Fréchet distance between two Gaussian summaries.

    ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the trace of
    the matrix square root computed from the symmetrized product
    sqrt(S_a) S_b sqrt(S_a). Result clamped to >= 0.
    """
    if a.mean.shape != b.mean.shape:
        raise DimensionMismatch(f"dimension {a.mean.shape} vs {b.mean.shape}")
    try:
        vals_a, vecs_a = np.linalg.eigh(a.cov)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    lam_max = max(float(vals_a.max()), 1e-12)
    if np.any(vals_a < -_EIG_CLAMP_REL * lam_max):
        raise EigenFailure(f"covariance eigenvalue {vals_a.min():.3e} below tolerance")
    sqrt_a = (vecs_a * np.sqrt(np.clip(vals_a, 0.0, None))) @ vecs_a.T

    inner = sqrt_a @ b.cov @ sqrt_a
    inner = (inner + inner.T) / 2.0
    tr_sqrt = float(np.sum(np.sqrt(_psd_sqrt_eigvals(inner))))

    dmu = a.mean - b.mean
    dist = float(dmu @ dmu) + float(np.trace(a.cov) + np.trace(b.cov)) - 2.0 * tr_sqrt
    return max(dist, 0.0)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise DimensionMismatch(f"length {u.size} vs {v.size}")
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.clip((u @ v) / (nu * nv), -1.0, 1.0))


def pooled_feature_vector(stack: FeatureStack) -> np.ndarray:
    """Concatenation of per-layer global-average-pooled channel vectors."""
    return np.concatenate([layer.data.mean(axis=(1, 2)) for layer in stack.layers])


def pair_frechet(ref: FeatureStack, mod: FeatureStack) -> float:
    """Per-pair Fréchet score on the deepest layer of each stack."""
    if ref.extractor_id != mod.extractor_id:
        raise ExtractorMismatch(f"{ref.extractor_id!r} vs {mod.extractor_id!r}")
    return frechet_distance(
        gaussian_summary(ref.layers[-1]), gaussian_summary(mod.layers[-1])
    )

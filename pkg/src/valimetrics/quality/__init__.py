from .pixel_stat import (
    emd,
    entropy,
    entropy_delta,
    histogram256,
    luma,
    mse,
    mutual_information,
    ncc,
    psnr,
    ssim,
)
from .featurefile import (
    FeatureMap,
    FeatureStack,
    LpipsWeights,
    load_feature_stack,
    load_lpips_weights,
    write_feature_stack,
    write_lpips_weights,
)
from .perceptual import (
    GaussianSummary,
    cosine_similarity,
    frechet_distance,
    gaussian_summary,
    lpips,
    pair_frechet,
    pooled_feature_vector,
)

__all__ = [
    "FeatureMap",
    "FeatureStack",
    "GaussianSummary",
    "LpipsWeights",
    "cosine_similarity",
    "emd",
    "entropy",
    "entropy_delta",
    "frechet_distance",
    "gaussian_summary",
    "histogram256",
    "load_feature_stack",
    "load_lpips_weights",
    "lpips",
    "luma",
    "mse",
    "mutual_information",
    "ncc",
    "pair_frechet",
    "pooled_feature_vector",
    "psnr",
    "ssim",
    "write_feature_stack",
    "write_lpips_weights",
]

"""Noise-aware, texture-preserving low-light image enhancement.

The pipeline decomposes an image into a piece-wise smooth illumination map
and a denoised, texture-preserving reflectance map via two closed-form
sparse least-squares solves, then brightens the illumination with gamma
correction and recombines.
"""

from .denoise import DenoiseParams, adaptive_bilateral, denoise_rgb, estimate_local_sigma, median_filter
from .illumination import IlluminationParams, estimate_illumination, smoothness_weights
from .image import (
    as_planar,
    as_rgb,
    hsv_to_rgb,
    init_illumination,
    load_image,
    rgb_to_hsv,
    save_image,
)
from .linsolve import SolveConfig, SolveDidNotConverge, solve_dense_oracle, solve_spd
from .metrics import SsimConfig, psnr, ssim
from .operators import (
    GradientField,
    SmoothnessWeights,
    SparseSystem,
    assemble_illumination_system,
    assemble_reflectance_system,
    divergence_weighted,
    gradient,
)
from .pipeline import EnhancementTrace, NatleParams, enhance, gamma_correct
from .reflectance import (
    ReflectanceInit,
    ReflectanceParams,
    compute_g,
    estimate_reflectance,
    init_reflectance,
)

__version__ = "0.1.0"

__all__ = [
    "DenoiseParams",
    "EnhancementTrace",
    "GradientField",
    "IlluminationParams",
    "NatleParams",
    "ReflectanceInit",
    "ReflectanceParams",
    "SmoothnessWeights",
    "SolveConfig",
    "SolveDidNotConverge",
    "SparseSystem",
    "SsimConfig",
    "adaptive_bilateral",
    "as_planar",
    "as_rgb",
    "assemble_illumination_system",
    "assemble_reflectance_system",
    "compute_g",
    "denoise_rgb",
    "divergence_weighted",
    "enhance",
    "estimate_illumination",
    "estimate_local_sigma",
    "estimate_reflectance",
    "gamma_correct",
    "gradient",
    "hsv_to_rgb",
    "init_illumination",
    "init_reflectance",
    "load_image",
    "median_filter",
    "psnr",
    "rgb_to_hsv",
    "save_image",
    "smoothness_weights",
    "solve_dense_oracle",
    "solve_spd",
    "ssim",
]

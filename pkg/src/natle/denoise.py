"""Noise removal for the reflectance initialization.

Each RGB channel goes through a small median filter (kills impulse noise)
followed by an adaptive bilateral filter whose range-kernel width tracks
the estimated local noise level, so heavily corrupted areas are smoothed
harder while clean texture is left intact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndimage

from .image import as_planar, as_rgb


@dataclass
class DenoiseParams:
    enabled: bool = True
    median_radius: int = 1
    abf_spatial_sigma: float = 2.0
    abf_range_sigma_min: float = 0.03
    abf_range_sigma_max: float = 0.15
    abf_window_radius: int = 5
    noise_window_radius: int = 3

    def __post_init__(self):
        if self.median_radius < 1 or self.abf_window_radius < 1 or self.noise_window_radius < 1:
            raise ValueError("all radii must be at least 1")
        if not 0 < self.abf_range_sigma_min <= self.abf_range_sigma_max:
            raise ValueError("need 0 < abf_range_sigma_min <= abf_range_sigma_max")
        if self.abf_spatial_sigma <= 0:
            raise ValueError("abf_spatial_sigma must be positive")


def median_filter(ch, radius: int = 1) -> np.ndarray:
    """(2r+1)^2 median with replicate borders."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    return ndimage.median_filter(as_planar(ch), size=2 * radius + 1, mode="nearest")


def estimate_local_sigma(ch, radius: int = 3) -> np.ndarray:
    """Per-pixel noise proxy: RMS of (pixel - local mean) over the window.

    Both the local mean and the residual average use the same (2r+1)^2
    replicate-padded box.
    """
    if radius < 1:
        raise ValueError("radius must be at least 1")
    arr = as_planar(ch)
    size = 2 * radius + 1
    residual = arr - ndimage.uniform_filter(arr, size=size, mode="nearest")
    mean_sq = ndimage.uniform_filter(residual * residual, size=size, mode="nearest")
    # the sliding-window accumulator can dip epsilon-negative
    return np.sqrt(np.maximum(mean_sq, 0.0))


def adaptive_bilateral(ch, sigma_map, params: DenoiseParams | None = None) -> np.ndarray:
    """Bilateral filter with fixed spatial kernel and per-pixel range width.

    The range sigma at each pixel is ``sigma_map`` clamped to the params'
    [min, max] band; weights are normalized per pixel over the
    (2*window_radius+1)^2 replicate-padded window.
    """
    if params is None:
        params = DenoiseParams()
    arr = as_planar(ch)
    sigmas = as_planar(sigma_map)
    if sigmas.shape != arr.shape:
        raise ValueError("sigma_map dimensions do not match the channel")
    if sigmas.min() < 0:
        raise ValueError("sigma_map must be non-negative")

    radius = params.abf_window_radius
    h, w = arr.shape
    range_sigma = np.clip(sigmas, params.abf_range_sigma_min, params.abf_range_sigma_max)
    inv_two_range_sq = 1.0 / (2.0 * range_sigma * range_sigma)
    inv_two_spatial_sq = 1.0 / (2.0 * params.abf_spatial_sigma**2)

    padded = np.pad(arr, radius, mode="edge")
    acc = np.zeros_like(arr)
    norm = np.zeros_like(arr)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            spatial = np.exp(-(dx * dx + dy * dy) * inv_two_spatial_sq)
            shifted = padded[radius + dy : radius + dy + h, radius + dx : radius + dx + w]
            diff = shifted - arr
            weight = spatial * np.exp(-(diff * diff) * inv_two_range_sq)
            acc += weight * shifted
            norm += weight
    return acc / norm


def denoise_rgb(img, params: DenoiseParams | None = None) -> np.ndarray:
    """Median pass then adaptive bilateral, independently per channel.

    The per-channel noise map is estimated after the median so impulse
    outliers do not inflate the bilateral's range width.
    """
    if params is None:
        params = DenoiseParams()
    rgb = as_rgb(img)
    out = np.empty_like(rgb)
    for c in range(3):
        flattened = median_filter(rgb[..., c], params.median_radius)
        sigma = estimate_local_sigma(flattened, params.noise_window_radius)
        out[..., c] = adaptive_bilateral(flattened, sigma, params)
    return out

"""Reference-based quality metrics: windowed SSIM and PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndimage

from .image import as_rgb, init_illumination


@dataclass
class SsimConfig:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError("window_size must be a positive odd integer")
        if self.sigma <= 0 or self.k1 <= 0 or self.k2 <= 0 or self.dynamic_range <= 0:
            raise ValueError("SSIM constants must be positive")


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size) - size // 2
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _windowed_mean(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable correlation; the margin crop makes padding mode irrelevant
    out = ndimage.correlate1d(arr, kernel, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="nearest")
    radius = len(kernel) // 2
    if radius:
        out = out[radius:-radius, radius:-radius]
    return out


def ssim(a, b, cfg: SsimConfig | None = None) -> float:
    """Mean structural similarity over the luminance channel.

    Uses the standard windowed statistics with a Gaussian window; windows
    that would overhang the border are dropped. For images smaller than
    the window, the window shrinks to the largest odd size that fits and
    its sigma scales proportionally.
    """
    if cfg is None:
        cfg = SsimConfig()
    img_a = as_rgb(a)
    img_b = as_rgb(b)
    if img_a.shape != img_b.shape:
        raise ValueError(f"image dimensions differ: {img_a.shape} vs {img_b.shape}")
    luma_a = init_illumination(img_a)
    luma_b = init_illumination(img_b)

    size = min(cfg.window_size, *luma_a.shape)
    if size % 2 == 0:
        size -= 1
    kernel = _gaussian_window(size, cfg.sigma * size / cfg.window_size)

    mu_a = _windowed_mean(luma_a, kernel)
    mu_b = _windowed_mean(luma_b, kernel)
    var_a = _windowed_mean(luma_a * luma_a, kernel) - mu_a * mu_a
    var_b = _windowed_mean(luma_b * luma_b, kernel) - mu_b * mu_b
    covar = _windowed_mean(luma_a * luma_b, kernel) - mu_a * mu_b

    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    score = ((2.0 * mu_a * mu_b + c1) * (2.0 * covar + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(score.mean())


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB over all channels (peak = 1).

    Identical images return ``math.inf`` as the distinguished value.
    """
    img_a = as_rgb(a)
    img_b = as_rgb(b)
    if img_a.shape != img_b.shape:
        raise ValueError(f"image dimensions differ: {img_a.shape} vs {img_b.shape}")
    mse = float(np.mean((img_a - img_b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)

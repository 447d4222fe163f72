"""Image containers, color-space conversion, and file I/O.

Images are plain float64 numpy arrays: single-channel maps are ``(H, W)``,
color images are ``(H, W, 3)``. Values live in [0, 1]; hue is stored as a
normalized angle in [0, 1). Clamping to [0, 1] happens only when an image
is written to disk, so intermediate maps are free to overshoot.
"""

from __future__ import annotations

import logging
import os

import cv2
import numpy as np

logger = logging.getLogger(__name__)

# BT.601 luminance weights used for the initial lightness map.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# Pixel-count guard: refuses images whose solve would not fit a desktop.
MAX_PIXELS = 1 << 24


class ImageReadError(OSError):
    """The path does not exist or cannot be opened."""


class UnsupportedImageError(ValueError):
    """The file exists but is not a decodable 8/16-bit PNG or JPEG."""


class ImageTooLargeError(ValueError):
    """The decoded image exceeds the pixel-count guard."""


def as_planar(arr) -> np.ndarray:
    """Validate and return a 2-D float64 map."""
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.size == 0:
        raise ValueError(f"expected a non-empty (H, W) map, got shape {out.shape}")
    return out


def as_rgb(arr) -> np.ndarray:
    """Validate and return an (H, W, 3) float64 image."""
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 3 or out.shape[2] != 3 or out.shape[0] == 0 or out.shape[1] == 0:
        raise ValueError(f"expected a non-empty (H, W, 3) image, got shape {out.shape}")
    return out


def rgb_to_hsv(img) -> np.ndarray:
    """Convert an RGB image in [0, 1] to hexcone HSV.

    Hue comes back as a normalized angle in [0, 1); achromatic pixels get
    hue 0 and saturation 0. Value is max(R, G, B).
    """
    rgb = as_rgb(img)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    chroma = v - rgb.min(axis=-1)
    chromatic = chroma > 0
    safe_c = np.where(chromatic, chroma, 1.0)
    sat = np.where(v > 0, chroma / np.where(v > 0, v, 1.0), 0.0)

    rmax = v == r
    gmax = (v == g) & ~rmax
    bmax = ~(rmax | gmax)
    h = np.where(rmax, (g - b) / safe_c, 0.0)
    h = np.where(gmax, 2.0 + (b - r) / safe_c, h)
    h = np.where(bmax, 4.0 + (r - g) / safe_c, h)
    h = np.where(chromatic, (h / 6.0) % 1.0, 0.0)
    return np.dstack([h, sat, v])


def hsv_to_rgb(img) -> np.ndarray:
    """Inverse hexcone conversion; hue is taken modulo 1."""
    hsv = as_rgb(img)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    k = (h % 1.0) * 6.0
    sector = np.floor(k).astype(np.int64) % 6
    f = k - np.floor(k)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(sector, [v, q, p, p, t, v])
    g = np.choose(sector, [t, v, v, q, p, p])
    b = np.choose(sector, [p, p, t, v, v, q])
    return np.dstack([r, g, b])


def init_illumination(img) -> np.ndarray:
    """Initial lightness map: BT.601-weighted combination of R, G, B."""
    return as_rgb(img) @ LUMA_WEIGHTS


def load_image(path) -> np.ndarray:
    """Load an 8- or 16-bit PNG/JPEG as an RGB float image in [0, 1].

    Grayscale files are replicated across the three channels; an alpha
    channel is dropped with a warning. 8-bit values are divided by 255,
    16-bit values by 65535.
    """
    name = os.fspath(path)
    if not os.path.isfile(name):
        raise ImageReadError(f"cannot read image file: {name}")
    raw = cv2.imread(name, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise UnsupportedImageError(f"not a decodable PNG/JPEG image: {name}")
    if raw.shape[0] * raw.shape[1] > MAX_PIXELS:
        raise ImageTooLargeError(
            f"{name}: {raw.shape[1]}x{raw.shape[0]} exceeds the {MAX_PIXELS}-pixel guard"
        )
    if raw.ndim == 2:
        raw = np.repeat(raw[:, :, None], 3, axis=2)
    elif raw.shape[2] == 4:
        logger.warning("%s: alpha channel dropped", name)
        raw = raw[:, :, :3]
    elif raw.shape[2] == 2:
        logger.warning("%s: alpha channel dropped", name)
        raw = np.repeat(raw[:, :, :1], 3, axis=2)
    elif raw.shape[2] != 3:
        raise UnsupportedImageError(f"{name}: unsupported channel count {raw.shape[2]}")

    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise UnsupportedImageError(f"{name}: unsupported sample type {raw.dtype}")
    return raw[:, :, ::-1].astype(np.float64) / scale


def save_image(path, img) -> None:
    """Write an RGB image as an 8-bit PNG, clamping to [0, 1] then rounding."""
    name = os.fspath(path)
    if not name.lower().endswith(".png"):
        raise UnsupportedImageError(f"only PNG output is supported: {name}")
    rgb = as_rgb(img)
    quantized = np.rint(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8)
    if not cv2.imwrite(name, quantized[:, :, ::-1]):
        raise ImageReadError(f"cannot write image file: {name}")

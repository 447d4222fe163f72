"""End-to-end enhancement: decompose, denoise, brighten, recombine.

Stages run strictly in order: initial luminance, smooth illumination
solve, reflectance initialization with its denoising round trip,
reflectance solve, gamma brightening of the illumination, and HSV
recombination using the denoised hue/saturation. The whole run is a pure
function of the input image and parameters.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .denoise import DenoiseParams
from .illumination import IlluminationParams, estimate_illumination
from .image import as_planar, as_rgb, hsv_to_rgb, init_illumination, rgb_to_hsv
from .linsolve import SolveConfig
from .reflectance import ReflectanceParams, estimate_reflectance, init_reflectance

# Flat config keys (one per CLI flag) -> (sub-config attribute, field name).
# ``None`` as the attribute means a field of NatleParams itself.
FLAT_FIELDS: dict[str, tuple[str | None, str]] = {
    "alpha": ("illumination", "alpha"),
    "eps": ("illumination", "eps"),
    "beta": ("reflectance", "beta"),
    "lambda": ("reflectance", "lam"),
    "eps_g": ("reflectance", "eps_g"),
    "gamma": (None, "gamma"),
    "median_radius": ("denoise", "median_radius"),
    "abf_spatial_sigma": ("denoise", "abf_spatial_sigma"),
    "abf_range_min": ("denoise", "abf_range_sigma_min"),
    "abf_range_max": ("denoise", "abf_range_sigma_max"),
    "no_denoise": ("denoise", "enabled"),
    "tol": ("solver", "rel_tolerance"),
    "max_iters": ("solver", "max_iterations"),
}

_INVERTED_FLAGS = {"no_denoise"}  # stored negated relative to the field


@dataclass
class NatleParams:
    illumination: IlluminationParams = field(default_factory=IlluminationParams)
    reflectance: ReflectanceParams = field(default_factory=ReflectanceParams)
    denoise: DenoiseParams = field(default_factory=DenoiseParams)
    solver: SolveConfig = field(default_factory=SolveConfig)
    gamma: float = 2.2

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def to_flat_dict(self) -> dict[str, object]:
        """Flat key=value view matching the CLI flags, for config files."""
        out: dict[str, object] = {}
        for key, (section, name) in FLAT_FIELDS.items():
            holder = self if section is None else getattr(self, section)
            value = getattr(holder, name)
            if key in _INVERTED_FLAGS:
                value = not value
            out[key] = value
        return out

    @classmethod
    def from_flat_dict(cls, flat: dict[str, object]) -> "NatleParams":
        """Build params from a flat mapping; unknown keys are rejected."""
        params = cls()
        for key, raw in flat.items():
            if key not in FLAT_FIELDS:
                raise KeyError(f"unknown parameter {key!r}")
            section, name = FLAT_FIELDS[key]
            current = params if section is None else getattr(params, section)
            kind = type(getattr(current, name))
            value: object
            if kind is bool:
                value = _parse_bool(raw)
                if key in _INVERTED_FLAGS:
                    value = not value
            elif kind is int:
                value = int(raw)  # type: ignore[call-overload]
            else:
                value = float(raw)  # type: ignore[arg-type]
            if section is None:
                params = replace(params, **{name: value})
            else:
                params = replace(params, **{section: replace(current, **{name: value})})
        return params


def _parse_bool(raw: object) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


@dataclass
class EnhancementTrace:
    """Per-stage wall-clock durations, warnings, and optional intermediates.

    With ``keep_maps`` the six stage maps are retained under the keys
    illum_init, illumination, reflectance_noisy, reflectance_denoised,
    reflectance, v_enhanced (plus hue/saturation for provenance checks).
    """

    keep_maps: bool = False
    durations_ms: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    maps: dict[str, np.ndarray] = field(default_factory=dict)

    def record(self, name: str, arr: np.ndarray) -> None:
        if self.keep_maps:
            self.maps[name] = arr


def gamma_correct(illumination, gamma: float) -> np.ndarray:
    """Pointwise brightening ``L -> L**(1/gamma)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return as_planar(illumination) ** (1.0 / gamma)


def enhance(img, params: NatleParams | None = None,
            keep_maps: bool = False) -> tuple[np.ndarray, EnhancementTrace]:
    """Run the full enhancement and return (output image, trace).

    An all-black input short-circuits: the reflectance is undefined when
    the illumination vanishes everywhere, so the image is returned as-is
    with a warning in the trace.
    """
    if params is None:
        params = NatleParams()
    rgb = as_rgb(img)
    trace = EnhancementTrace(keep_maps=keep_maps)
    if params.illumination.alpha == 0.0:
        trace.warnings.append("alpha=0: illumination is the clamped initial luminance")
    if params.reflectance.beta == 0.0:
        trace.warnings.append("beta=0: reflectance equals its initialization")
    if not params.denoise.enabled:
        trace.warnings.append("denoising disabled")
    total_start = time.perf_counter()

    stage_start = time.perf_counter()
    lhat = init_illumination(rgb)
    trace.record("illum_init", lhat)
    if lhat.max() == 0.0:
        trace.warnings.append("all-black input: enhancement skipped")
        trace.durations_ms["illum"] = (time.perf_counter() - stage_start) * 1000.0
        trace.durations_ms["denoise"] = 0.0
        trace.durations_ms["reflect"] = 0.0
        trace.durations_ms["total"] = (time.perf_counter() - total_start) * 1000.0
        return np.zeros_like(rgb), trace

    light = estimate_illumination(lhat, params.illumination, params.solver)
    trace.record("illumination", light)
    trace.durations_ms["illum"] = (time.perf_counter() - stage_start) * 1000.0

    hsv = rgb_to_hsv(rgb)
    scene_v = hsv[..., 2]
    if trace.keep_maps:
        raw = np.minimum(scene_v / (light + params.reflectance.epsilon_div),
                         params.reflectance.ratio_cap)
        trace.record("reflectance_noisy", raw)

    stage_start = time.perf_counter()
    init = init_reflectance(hsv, light, params.reflectance, params.denoise)
    trace.record("reflectance_denoised", init.rhat)
    trace.record("hue", init.hue)
    trace.record("saturation", init.sat)
    trace.durations_ms["denoise"] = (time.perf_counter() - stage_start) * 1000.0

    stage_start = time.perf_counter()
    reflectance = estimate_reflectance(init, scene_v, params.reflectance, params.solver)
    trace.record("reflectance", reflectance)
    trace.durations_ms["reflect"] = (time.perf_counter() - stage_start) * 1000.0

    v_enhanced = np.clip(reflectance * gamma_correct(light, params.gamma), 0.0, 1.0)
    trace.record("v_enhanced", v_enhanced)
    output = hsv_to_rgb(np.dstack([init.hue, init.sat, v_enhanced]))
    trace.durations_ms["total"] = (time.perf_counter() - total_start) * 1000.0
    return output, trace

"""Piece-wise smooth illumination estimation.

The lightness field is fit to the initial luminance under a quadratic
smoothness penalty whose per-pixel weights are inversely proportional to
the initial map's gradient magnitude: flat regions are smoothed hard,
salient edges are left alone. The weights depend only on the initial map,
so the whole estimate is one linear solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .image import as_planar
from .linsolve import SolveConfig, solve_spd
from .operators import SmoothnessWeights, assemble_illumination_system, gradient

logger = logging.getLogger(__name__)


@dataclass
class IlluminationParams:
    alpha: float = 0.015  # smoothness strength
    eps: float = 1e-3     # gradient floor; also the post-solve lower clamp

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


def smoothness_weights(lhat, params: IlluminationParams) -> SmoothnessWeights:
    """Per-direction weights ``alpha / (|grad lhat| + eps)``."""
    grad = gradient(lhat)
    ah = params.alpha / (np.abs(grad.gh) + params.eps)
    av = params.alpha / (np.abs(grad.gv) + params.eps)
    return SmoothnessWeights(ah, av)


def estimate_illumination(
    lhat, params: IlluminationParams | None = None, solve_cfg: SolveConfig | None = None
) -> np.ndarray:
    """Solve for the smooth illumination map and clamp it to [eps, 1].

    The clamp keeps the later reflectance division bounded; a solve can
    undershoot slightly below zero next to strong edges.
    """
    if params is None:
        params = IlluminationParams()
    initial = as_planar(lhat)
    system = assemble_illumination_system(smoothness_weights(initial, params))
    solution = solve_spd(system, initial, solve_cfg)
    out_of_range = int(np.count_nonzero((solution < params.eps) | (solution > 1.0)))
    if out_of_range:
        logger.debug("illumination clamp engaged on %d pixels", out_of_range)
    return np.clip(solution, params.eps, 1.0)


def illumination_objective(candidate, lhat, params: IlluminationParams) -> float:
    """Data term plus weighted quadratic smoothness penalty."""
    cand = as_planar(candidate)
    initial = as_planar(lhat)
    weights = smoothness_weights(initial, params)
    grad = gradient(cand)
    return float(
        np.sum((cand - initial) ** 2)
        + np.sum(weights.ah * grad.gh**2)
        + np.sum(weights.av * grad.gv**2)
    )

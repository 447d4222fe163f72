"""Forward-difference operators and the two five-point sparse systems.

Both linear systems share the structure ``I + sum_d D_d^T diag(w_d) D_d``
on the row-major vectorized image, where ``D_d`` is the forward difference
along direction ``d`` with replicate boundary (the last difference in each
direction is zero). The diagonal is ``1 +`` the sum of non-negative
neighbor link weights, so the matrices are strictly diagonally dominant
and symmetric positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .image import as_planar


class GradientField(NamedTuple):
    """Forward differences; ``gh`` last column and ``gv`` last row are zero."""

    gh: np.ndarray
    gv: np.ndarray


class SmoothnessWeights(NamedTuple):
    """Per-direction, per-pixel non-negative link weights."""

    ah: np.ndarray
    av: np.ndarray


@dataclass(frozen=True)
class SparseSystem:
    """SPD five-point system over an H*W grid in row-major ordering."""

    height: int
    width: int
    matrix: sp.csr_matrix

    @property
    def order(self) -> int:
        return self.height * self.width

    def apply(self, img) -> np.ndarray:
        return (self.matrix @ as_planar(img).ravel()).reshape(self.height, self.width)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def gradient(img) -> GradientField:
    """Forward differences with replicate boundary."""
    arr = as_planar(img)
    gh = np.zeros_like(arr)
    gv = np.zeros_like(arr)
    gh[:, :-1] = arr[:, 1:] - arr[:, :-1]
    gv[:-1, :] = arr[1:, :] - arr[:-1, :]
    return GradientField(gh, gv)


def divergence_weighted(field: GradientField, weights: SmoothnessWeights) -> np.ndarray:
    """Apply the adjoint accumulation ``sum_d D_d^T (w_d * field_d)``.

    This is the negative backward difference with boundary terms; the last
    column/row of the weighted field never contributes because the forward
    operator has no difference there.
    """
    gh = as_planar(field.gh)
    gv = as_planar(field.gv)
    if gh.shape != gv.shape or gh.shape != np.shape(weights.ah) or gh.shape != np.shape(weights.av):
        raise ValueError("field and weight dimensions do not match")
    uh = weights.ah * gh
    uv = weights.av * gv
    out = np.zeros_like(uh)
    out[:, :-1] -= uh[:, :-1]
    out[:, 1:] += uh[:, :-1]
    out[:-1, :] -= uv[:-1, :]
    out[1:, :] += uv[:-1, :]
    return out


def _five_point_system(link_h: np.ndarray, link_v: np.ndarray) -> SparseSystem:
    """Assemble ``I + sum_d D_d^T diag(link_d) D_d`` from link weights.

    ``link_h[y, x]`` couples pixel (y, x) with (y, x+1) and must be zero in
    the last column; ``link_v`` analogously in the last row.
    """
    h, w = link_h.shape
    n = h * w
    lh = link_h.ravel()
    lv = link_v.ravel()
    diag = 1.0 + lh + lv
    diag[1:] += lh[:-1]
    diag[w:] += lv[:-w]
    mat = sp.diags_array([diag], offsets=[0], shape=(n, n))
    if n > 1:
        mat = mat + sp.diags_array([-lh[:-1], -lh[:-1]], offsets=[1, -1], shape=(n, n))
    if n > w:
        mat = mat + sp.diags_array([-lv[: n - w], -lv[: n - w]], offsets=[w, -w], shape=(n, n))
    return SparseSystem(height=h, width=w, matrix=sp.csr_matrix(mat))


def assemble_illumination_system(weights: SmoothnessWeights) -> SparseSystem:
    """System matrix for the smoothness-weighted illumination solve."""
    ah = as_planar(weights.ah)
    av = as_planar(weights.av)
    if ah.shape != av.shape:
        raise ValueError("weight map dimensions do not match")
    if not (np.all(np.isfinite(ah)) and np.all(np.isfinite(av))):
        raise ValueError("smoothness weights must be finite")
    if ah.min() < 0 or av.min() < 0:
        raise ValueError("smoothness weights must be non-negative")
    link_h = ah.copy()
    link_h[:, -1] = 0.0
    link_v = av.copy()
    link_v[-1, :] = 0.0
    return _five_point_system(link_h, link_v)


def assemble_reflectance_system(beta: float, dims: tuple[int, int]) -> SparseSystem:
    """System matrix ``I + beta * sum_d D_d^T D_d`` for the gradient-fit solve."""
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    h, w = dims
    if h < 1 or w < 1:
        raise ValueError(f"invalid dimensions {dims}")
    link_h = np.full((h, w), float(beta))
    link_h[:, -1] = 0.0
    link_v = np.full((h, w), float(beta))
    link_v[-1, :] = 0.0
    return _five_point_system(link_h, link_v)

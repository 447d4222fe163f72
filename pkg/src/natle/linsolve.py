"""Iterative and dense direct solvers for the five-point SPD systems.

The iterative path is a Jacobi-preconditioned conjugate gradient started
from the right-hand side. Starting at the RHS makes an identity system
(all link weights zero) converge in zero iterations and return the RHS
bitwise, and guarantees the quadratic objective at the returned solution
never exceeds the objective at the initializer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import SparseSystem

# Order guard for the dense path, so a full-size image can never be
# materialized as an N x N array by accident.
DENSE_ORACLE_MAX_ORDER = 400


class SolveDidNotConverge(RuntimeError):
    """Raised when the residual target is not met within the iteration budget."""

    def __init__(self, iterations: int, achieved: float, target: float):
        self.iterations = iterations
        self.achieved = achieved
        self.target = target
        super().__init__(
            f"no convergence after {iterations} iterations: "
            f"relative residual {achieved:.3e} > {target:.3e}"
        )


class SingularSystemError(RuntimeError):
    """Raised when the dense factorization reports a singular matrix."""


@dataclass
class SolveConfig:
    rel_tolerance: float = 1e-6
    max_iterations: int = 2000
    preconditioner: str = "jacobi"  # "jacobi" or "none"

    def __post_init__(self):
        if self.rel_tolerance <= 0:
            raise ValueError("rel_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.preconditioner not in ("jacobi", "none"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


def solve_spd(system: SparseSystem, rhs, cfg: SolveConfig | None = None) -> np.ndarray:
    """Solve ``A x = rhs`` to ``||Ax - b|| <= rel_tolerance * ||b||``.

    Deterministic for fixed inputs and config. Raises SolveDidNotConverge
    with the achieved residual if the budget runs out.
    """
    if cfg is None:
        cfg = SolveConfig()
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape != (system.height, system.width):
        raise ValueError(f"rhs shape {b.shape} does not match system grid "
                         f"({system.height}, {system.width})")
    if not np.all(np.isfinite(b)):
        raise ValueError("rhs must be finite")
    shape = b.shape
    b = b.ravel()
    a = system.matrix

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(shape)
    target = cfg.rel_tolerance * b_norm

    x = b.copy()
    r = b - a @ x
    if np.linalg.norm(r) <= target:
        return x.reshape(shape)

    jacobi = cfg.preconditioner == "jacobi"
    inv_diag = 1.0 / a.diagonal() if jacobi else None

    z = inv_diag * r if jacobi else r.copy()
    p = z.copy()
    rz = float(r @ z)
    for iteration in range(1, cfg.max_iterations + 1):
        ap = a @ p
        step = rz / float(p @ ap)
        x += step * p
        r -= step * ap
        if np.linalg.norm(r) <= target:
            # guard against drift between the recurrence and the true residual
            r = b - a @ x
            if np.linalg.norm(r) <= target:
                return x.reshape(shape)
            z = inv_diag * r if jacobi else r.copy()
            p = z.copy()
            rz = float(r @ z)
            continue
        z = inv_diag * r if jacobi else r.copy()
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next

    achieved = float(np.linalg.norm(b - a @ x)) / b_norm
    raise SolveDidNotConverge(cfg.max_iterations, achieved, cfg.rel_tolerance)


def solve_dense_oracle(system: SparseSystem, rhs) -> np.ndarray:
    """Direct dense factorization solve, for cross-checking small systems."""
    if system.order > DENSE_ORACLE_MAX_ORDER:
        raise ValueError(
            f"dense oracle limited to order {DENSE_ORACLE_MAX_ORDER}, got {system.order}"
        )
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape != (system.height, system.width):
        raise ValueError(f"rhs shape {b.shape} does not match system grid "
                         f"({system.height}, {system.width})")
    try:
        x = np.linalg.solve(system.to_dense(), b.ravel())
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    return x.reshape(b.shape)

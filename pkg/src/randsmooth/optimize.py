"""Fixed-step gradient descent driven by raw or smoothed gradient estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .estimators import (
    GRADIENT_ESTIMATORS,
    EstimatorError,
    NonFiniteError,
    SmoothingConfig,
    UnsupportedEstimatorError,
)
from .problems import Objective

__all__ = ["GRAD_SOURCES", "DescentConfig", "Iterate", "Trajectory", "DivergenceError", "iteration_seed", "check_source", "run_descent"]

GRAD_SOURCES = ("raw", "zeroth", "zeroth_baseline", "first")


@dataclass(frozen=True)
class DescentConfig:
    step_size: float
    max_iters: int
    grad_source: str = "raw"
    smoothing: Optional[SmoothingConfig] = None
    stop_tol: float = 0.0
    reseed_per_iter: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ValueError("step_size must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if self.grad_source not in GRAD_SOURCES:
            raise ValueError(f"grad_source must be one of {GRAD_SOURCES}, got {self.grad_source!r}")
        if self.grad_source != "raw" and self.smoothing is None:
            raise ValueError(f"grad_source {self.grad_source!r} needs a SmoothingConfig")
        if not self.stop_tol >= 0:
            raise ValueError("stop_tol must be nonnegative")


class Iterate(NamedTuple):
    iteration: int
    x: np.ndarray
    value: float
    grad_norm: float


@dataclass
class Trajectory:
    iterates: list[Iterate] = field(default_factory=list)
    terminated_by: str = ""

    def __len__(self):
        return len(self.iterates)

    @property
    def xs(self) -> np.ndarray:
        return np.array([it.x for it in self.iterates])

    @property
    def values(self) -> np.ndarray:
        return np.array([it.value for it in self.iterates])

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([it.grad_norm for it in self.iterates])

    @property
    def final(self) -> Iterate:
        return self.iterates[-1]


class DivergenceError(EstimatorError, ArithmeticError):
    """Iterates left the finite range; ``trajectory`` holds the finite prefix."""

    def __init__(self, message: str, trajectory: Trajectory):
        self.trajectory = trajectory
        super().__init__(message)


def iteration_seed(seed: int, k: int) -> int:
    """``seed`` XOR ``k`` shifted into the high word.

    A plain ``seed ^ k`` makes runs with seeds 0 and 1 share every noise
    stream (in swapped order); the shift keeps seeds below 2**32 disjoint.
    """
    return (int(seed) ^ (int(k) << 32)) & 0xFFFFFFFFFFFFFFFF


def check_source(g: Objective, grad_source: str) -> None:
    if grad_source in ("raw", "first") and not g.has_gradient:
        raise UnsupportedEstimatorError(
            f"grad_source {grad_source!r} needs a gradient oracle, which {g.name!r} does not expose"
        )


def run_descent(g: Objective, x0, cfg: DescentConfig, *, workers: int = 1) -> Trajectory:
    """Iterate x <- x - step_size * grad_estimate(x).

    Each iterate records the raw objective value and the norm of the gradient
    estimate taken there.  With ``reseed_per_iter`` the estimate at iteration
    k uses seed ``iteration_seed(smoothing.seed, k)``.  Stops after ``max_iters`` updates or
    as soon as the estimated gradient norm drops below ``stop_tol``.
    """
    check_source(g, cfg.grad_source)
    x = np.array(x0, dtype=np.float64).reshape(-1)
    if x.size != g.dim:
        raise ValueError(f"x0 has dimension {x.size}, objective expects {g.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")

    traj = Trajectory()
    for k in range(cfg.max_iters + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                value = float(g.value(x))
            if not math.isfinite(value):
                raise NonFiniteError(f"objective is non-finite at iteration {k}")
            grad = _gradient(g, x, cfg, k, workers)
        except NonFiniteError as exc:
            raise DivergenceError(str(exc), traj) from exc
        norm = float(np.linalg.norm(grad))
        traj.iterates.append(Iterate(k, x.copy(), value, norm))
        if k == cfg.max_iters:
            traj.terminated_by = "max_iters"
            break
        if norm < cfg.stop_tol:
            traj.terminated_by = "stop_tol"
            break
        x = x - cfg.step_size * grad
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"iterate became non-finite at iteration {k + 1}", traj)
    return traj


def _gradient(g: Objective, x: np.ndarray, cfg: DescentConfig, k: int, workers: int) -> np.ndarray:
    if cfg.grad_source == "raw":
        grad = np.asarray(g.gradient(x), dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"raw gradient is non-finite at iteration {k}")
        return grad
    smoothing = cfg.smoothing
    if cfg.reseed_per_iter:
        smoothing = smoothing.with_seed(iteration_seed(smoothing.seed, k))
    return GRADIENT_ESTIMATORS[cfg.grad_source](g, x, smoothing, workers=workers).mean

"""Monte-Carlo estimators of a randomly smoothed objective and its gradient.

For g_eps(x) = E[g(x + eps Z)], Z ~ mu:

* :func:`smoothed_value` averages g(x + eps z_i);
* :func:`grad_zeroth` averages -g(x + eps z_i) * score(z_i) / eps and needs
  only function values;
* :func:`grad_zeroth_baseline` subtracts g(x) inside the same average as a
  control variate;
* :func:`grad_first` averages the a.e. gradient of g at x + eps z_i.

Sample ``i`` (1-based) always uses random stream ``i`` of ``cfg.seed`` and the
per-sample terms are reduced with :func:`math.fsum`, which is exactly
rounded.  Results are therefore bit-identical for any ``workers`` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .noise import NoiseDistribution, sample_block, score
from .problems import Objective

__all__ = [
    "SmoothingConfig",
    "ValueEstimate",
    "GradientEstimate",
    "EstimatorError",
    "NonFiniteError",
    "UnsupportedEstimatorError",
    "smoothed_value",
    "grad_zeroth",
    "grad_zeroth_baseline",
    "grad_first",
    "GRADIENT_ESTIMATORS",
    "estimate_gradient",
]

CHUNK = 8192


class EstimatorError(RuntimeError):
    pass


class NonFiniteError(EstimatorError, ArithmeticError):
    """An objective returned a non-finite value or gradient."""

    def __init__(self, message: str, sample_index: int | None = None):
        self.sample_index = sample_index
        super().__init__(message if sample_index is None else f"{message} (sample {sample_index})")


class UnsupportedEstimatorError(EstimatorError, ValueError):
    """The requested estimator needs a capability the objective lacks."""


@dataclass(frozen=True)
class SmoothingConfig:
    epsilon: float
    samples: int
    dist: NoiseDistribution = field(default_factory=NoiseDistribution)
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError(f"samples must be a positive integer, got {self.samples!r}")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))

    def with_seed(self, seed: int) -> SmoothingConfig:
        return SmoothingConfig(self.epsilon, self.samples, self.dist, seed)


@dataclass(frozen=True)
class ValueEstimate:
    mean: float
    stderr: float
    samples_used: int


@dataclass(frozen=True)
class GradientEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    samples_used: int
    epsilon: float
    estimator: str = ""


def _check_x(x, cfg: SmoothingConfig) -> np.ndarray:
    x = np.array(x, dtype=np.float64).reshape(-1)
    if x.size != cfg.dist.dim:
        raise ValueError(f"x has dimension {x.size} but the noise has dimension {cfg.dist.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    return x


def _terms(
    cfg: SmoothingConfig,
    workers: int,
    fn: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    """Evaluate ``fn(Z)`` on the noise of samples 1..M, chunk by chunk, in order.

    ``fn`` maps a ``(k, d)`` block of noise to ``(k, m)`` per-sample terms.
    """
    starts = range(1, cfg.samples + 1, CHUNK)

    def run(start):
        count = min(CHUNK, cfg.samples + 1 - start)
        z = sample_block(cfg.dist, cfg.seed, start, count)
        with np.errstate(over="ignore", invalid="ignore"):
            t = np.asarray(fn(z), dtype=np.float64).reshape(count, -1)
        bad = ~np.all(np.isfinite(t), axis=1)
        if bad.any():
            raise NonFiniteError("objective returned a non-finite value", start + int(np.argmax(bad)))
        return t

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, starts))
    else:
        blocks = [run(s) for s in starts]
    return np.concatenate(blocks, axis=0)


def _reduce(terms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exactly rounded mean and standard error of the mean, per column."""
    m = terms.shape[0]
    mean = np.array([math.fsum(col) / m for col in terms.T])
    if m == 1:
        return mean, np.zeros_like(mean)
    dev = terms - mean
    var = np.array([math.fsum(col) / (m - 1) for col in (dev * dev).T])
    return mean, np.sqrt(var / m)


def smoothed_value(g: Objective, x, cfg: SmoothingConfig, *, workers: int = 1) -> ValueEstimate:
    """Monte-Carlo estimate of g_eps(x) = E[g(x + eps Z)]."""
    x = _check_x(x, cfg)
    terms = _terms(cfg, workers, lambda z: g.value(x + cfg.epsilon * z))
    mean, stderr = _reduce(terms)
    return ValueEstimate(float(mean[0]), float(stderr[0]), cfg.samples)


def grad_zeroth(g: Objective, x, cfg: SmoothingConfig, *, workers: int = 1) -> GradientEstimate:
    """Score-function gradient of g_eps using function values only.

    Works for discontinuous g.  Without a baseline the variance does not
    vanish even for constant g.
    """
    x = _check_x(x, cfg)
    eps = cfg.epsilon

    def fn(z):
        v = np.asarray(g.value(x + eps * z), dtype=np.float64)[:, None]
        return -v * score(cfg.dist, z) / eps

    mean, stderr = _reduce(_terms(cfg, workers, fn))
    return GradientEstimate(mean, stderr, cfg.samples, eps, "zeroth")


def grad_zeroth_baseline(g: Objective, x, cfg: SmoothingConfig, *, workers: int = 1) -> GradientEstimate:
    """:func:`grad_zeroth` with g(x) subtracted from every sample.

    Same expectation (the score has zero mean); usually far lower variance
    when eps is small relative to the scale on which g varies.
    """
    x = _check_x(x, cfg)
    eps = cfg.epsilon
    g0 = float(g.value(x))
    if not math.isfinite(g0):
        raise NonFiniteError("objective is non-finite at the query point")

    def fn(z):
        v = np.asarray(g.value(x + eps * z), dtype=np.float64)[:, None] - g0
        return -v * score(cfg.dist, z) / eps

    mean, stderr = _reduce(_terms(cfg, workers, fn))
    return GradientEstimate(mean, stderr, cfg.samples, eps, "zeroth_baseline")


def grad_first(g: Objective, x, cfg: SmoothingConfig, *, workers: int = 1) -> GradientEstimate:
    """Average of the objective's own gradient at the perturbed points.

    Samples that land exactly on a kink get whatever the objective's
    ``kink_convention`` says.
    """
    if not g.has_gradient:
        raise UnsupportedEstimatorError(f"objective {g.name!r} exposes no gradient oracle")
    x = _check_x(x, cfg)
    eps = cfg.epsilon
    mean, stderr = _reduce(_terms(cfg, workers, lambda z: g.gradient(x + eps * z)))
    return GradientEstimate(mean, stderr, cfg.samples, eps, "first")


GRADIENT_ESTIMATORS = {
    "zeroth": grad_zeroth,
    "zeroth_baseline": grad_zeroth_baseline,
    "first": grad_first,
}


def estimate_gradient(
    name: str, g: Objective, x, cfg: SmoothingConfig, *, workers: int = 1
) -> GradientEstimate:
    try:
        fn = GRADIENT_ESTIMATORS[name]
    except KeyError:
        raise ValueError(f"unknown estimator {name!r}") from None
    return fn(g, x, cfg, workers=workers)

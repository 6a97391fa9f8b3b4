"""Smoothing distributions and reproducible per-sample random streams.

Every Monte-Carlo sample ``i`` draws its noise from its own counter-based
stream ``(seed, stream_index=i)``.  The generator is Philox4x32-10, evaluated
vectorized over many stream indices at once, so a block of samples is
bit-identical to drawing each sample on its own, whatever the chunking or
worker count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = [
    "Kind",
    "NoiseDistribution",
    "RngStream",
    "philox4x32",
    "uniforms",
    "sample",
    "sample_block",
    "log_density",
    "score",
]

_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = (1 << 64) - 1
_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = 0x9E3779B9
_PHILOX_W1 = 0xBB67AE85
_LOG_2PI = math.log(2.0 * math.pi)


class Kind(str, enum.Enum):
    STANDARD_GAUSSIAN = "gaussian"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class NoiseDistribution:
    """Product distribution of ``dim`` i.i.d. coordinates of the given kind.

    Both kinds have a strictly positive, smooth density on all of R^d, so the
    score ``grad log mu`` exists everywhere.
    """

    kind: Kind = Kind.STANDARD_GAUSSIAN
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def gaussian(cls, dim: int = 1) -> NoiseDistribution:
        return cls(Kind.STANDARD_GAUSSIAN, dim)

    @classmethod
    def logistic(cls, dim: int = 1) -> NoiseDistribution:
        return cls(Kind.LOGISTIC, dim)


@dataclass(frozen=True)
class RngStream:
    """Immutable token naming one random stream; seeds are reduced mod 2**64."""

    seed: int
    stream_index: int

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_index", int(self.stream_index) & _MASK64)


def philox4x32(counter, key) -> np.ndarray:
    """Philox4x32-10 block function.

    ``counter`` is a sequence of four arrays of 32-bit words (broadcastable),
    ``key`` a pair of 32-bit words.  Returns an array of shape ``(4, ...)``
    holding the output words as ``uint64`` values below 2**32.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(10):
        if r:
            k0 = (k0 + _PHILOX_W0) & 0xFFFFFFFF
            k1 = (k1 + _PHILOX_W1) & 0xFFFFFFFF
        p0 = _PHILOX_M0 * c0
        p1 = _PHILOX_M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ np.uint64(k0),
            p1 & _MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ np.uint64(k1),
            p0 & _MASK32,
        )
    return np.stack([c0, c1, c2, c3])


def uniforms(seed: int, stream_indices, count: int) -> np.ndarray:
    """Open-interval uniforms, ``count`` per stream, shape ``(len(streams), count)``.

    Draw ``j`` of stream ``s`` comes from Philox block ``j // 2`` with counter
    ``(block, 0, s_lo, s_hi)`` and key ``(seed_lo, seed_hi)``; each block yields
    two 53-bit doubles.
    """
    seed = int(seed) & _MASK64
    streams = np.asarray(stream_indices, dtype=np.uint64).reshape(-1)
    nblocks = (count + 1) // 2
    blocks = np.arange(nblocks, dtype=np.uint64)
    s_lo = (streams & _MASK32)[:, None]
    s_hi = (streams >> np.uint64(32))[:, None]
    words = philox4x32(
        (blocks[None, :], np.uint64(0), s_lo, s_hi), (seed & 0xFFFFFFFF, seed >> 32)
    )
    a = (words[0] << np.uint64(32)) | words[1]
    b = (words[2] << np.uint64(32)) | words[3]
    bits = np.stack([a, b], axis=-1).reshape(len(streams), 2 * nblocks)[:, :count]
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _transform(dist: NoiseDistribution, u: np.ndarray) -> np.ndarray:
    if dist.kind is Kind.STANDARD_GAUSSIAN:
        return ndtri(u)
    return np.log(u) - np.log1p(-u)


def sample(dist: NoiseDistribution, rng: RngStream) -> np.ndarray:
    """One draw of Z ~ dist from stream ``rng``; a vector of length ``dist.dim``."""
    return sample_block(dist, rng.seed, rng.stream_index, 1)[0]


def sample_block(dist: NoiseDistribution, seed: int, start: int, count: int) -> np.ndarray:
    """Draws for streams ``start .. start+count-1`` stacked as rows ``(count, dim)``.

    Row ``k`` equals ``sample(dist, RngStream(seed, start + k))`` bit for bit.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    streams = (np.uint64(int(start) & _MASK64) + np.arange(count, dtype=np.uint64))
    return _transform(dist, uniforms(seed, streams, dist.dim))


def _check_point(dist: NoiseDistribution, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1:] != (dist.dim,):
        raise ValueError(f"expected trailing dimension {dist.dim}, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite noise sample")
    return z


def log_density(dist: NoiseDistribution, z) -> np.ndarray | float:
    """log mu(z).  Accepts a single vector or a batch with trailing axis ``dim``."""
    z = _check_point(dist, z)
    if dist.kind is Kind.STANDARD_GAUSSIAN:
        out = -0.5 * np.sum(z * z, axis=-1) - 0.5 * dist.dim * _LOG_2PI
    else:
        # log of e^-z / (1 + e^-z)^2, symmetric in z
        a = np.abs(z)
        out = np.sum(-a - 2.0 * np.log1p(np.exp(-a)), axis=-1)
    return out[()] if np.ndim(out) == 0 else out


def score(dist: NoiseDistribution, z) -> np.ndarray:
    """grad_z log mu(z): ``-z`` for the Gaussian, ``-tanh(z/2)`` for the logistic."""
    z = _check_point(dist, z)
    if dist.kind is Kind.STANDARD_GAUSSIAN:
        return -z
    return -np.tanh(0.5 * z)

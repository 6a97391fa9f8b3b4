"""Deterministic ground truth for Gaussian smoothing in one dimension.

The quadrature integrates against the standard normal density on
``[-half_width, half_width]``; at the default half width of 8 the neglected
tail mass is 2 * Phi(-8) ~ 1.2e-15.  The interval is cut wherever the
objective declares a breakpoint, and each piece gets its own composite
Simpson rule evaluated with one-sided limits at the cut, so jumps and kinks
never sit inside a panel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .problems import Objective

__all__ = [
    "QuadratureRule",
    "OracleError",
    "simpson_nodes",
    "quad_smoothed_value",
    "quad_smoothed_grad",
    "closed_form",
    "CLOSED_FORMS",
    "finite_diff",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# relative inward shift of panel endpoints that touch a cut
_ONE_SIDED = 1e-12


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    nodes: int = 10001
    half_width: float = 8.0

    def __post_init__(self):
        if self.nodes < 101 or self.nodes % 2 == 0:
            raise ValueError(f"nodes must be odd and >= 101, got {self.nodes}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")


def _phi(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def simpson_nodes(x: float, epsilon: float, breakpoints, rule: QuadratureRule):
    """Abscissae ``z`` and weights for the split composite Simpson rule.

    Nodes are spread over the pieces in proportion to their length, each
    piece receiving an odd count of at least 3.
    """
    hw = rule.half_width
    cuts = sorted({(b - x) / epsilon for b in breakpoints if -hw < (b - x) / epsilon < hw})
    edges = [-hw, *cuts, hw]
    total = 2.0 * hw
    pairs = (rule.nodes - 1) // 2
    zs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        m = max(1, round(pairs * (b - a) / total))
        z = np.linspace(a, b, 2 * m + 1)
        h = (b - a) / (2 * m)
        w = np.full(2 * m + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= h / 3.0
        # approach the cut from inside the panel
        if a != -hw:
            z[0] = a + _ONE_SIDED * max(1.0, abs(a))
        if b != hw:
            z[-1] = b - _ONE_SIDED * max(1.0, abs(b))
        zs.append(z)
        ws.append(w)
    return np.concatenate(zs), np.concatenate(ws)


def _integrand_values(g: Objective, x: float, epsilon: float, z: np.ndarray) -> np.ndarray:
    if g.dim != 1:
        raise ValueError("quadrature oracle is one-dimensional")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    v = np.asarray(g.value((x + epsilon * z)[:, None]), dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise OracleError(f"objective {g.name!r} is non-finite on a quadrature node")
    return v


def quad_smoothed_value(g: Objective, x: float, epsilon: float, rule: QuadratureRule = QuadratureRule()) -> float:
    """int g(x + eps z) phi(z) dz."""
    x = float(x)
    z, w = simpson_nodes(x, epsilon, g.breakpoints, rule)
    v = _integrand_values(g, x, epsilon, z)
    return math.fsum(w * v * _phi(z))


def quad_smoothed_grad(g: Objective, x: float, epsilon: float, rule: QuadratureRule = QuadratureRule()) -> float:
    """d/dx g_eps(x) = int g(x + eps z) z phi(z) dz / eps, the Gaussian score form."""
    x = float(x)
    z, w = simpson_nodes(x, epsilon, g.breakpoints, rule)
    v = _integrand_values(g, x, epsilon, z)
    return math.fsum(w * v * z * _phi(z)) / epsilon


def _heaviside(x, eps):
    t = x / eps
    return float(ndtr(t)), float(_phi(t)) / eps


def _relu(x, eps):
    t = x / eps
    return float(x * ndtr(t) + eps * _phi(t)), float(ndtr(t))


def _abs(x, eps):
    t = x / eps
    return float(x * (2.0 * ndtr(t) - 1.0) + 2.0 * eps * _phi(t)), float(2.0 * ndtr(t) - 1.0)


def _quadratic1d(x, eps):
    return x * x + eps * eps, 2.0 * x


def _constant(x, eps):
    return 1.0, 0.0


CLOSED_FORMS = {
    "heaviside": _heaviside,
    "relu": _relu,
    "abs": _abs,
    "quadratic1d": _quadratic1d,
    "constant": _constant,
}


def closed_form(name: str, x: float, epsilon: float) -> tuple[float, float]:
    """Exact ``(g_eps(x), g_eps'(x))`` under standard Gaussian smoothing.

    ``constant`` refers to g = 1.
    """
    try:
        fn = CLOSED_FORMS[name]
    except KeyError:
        raise ValueError(f"no closed form for {name!r}") from None
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return fn(float(x), float(epsilon))


def finite_diff(g: Objective, x, h: float = 1e-6) -> np.ndarray:
    """Central difference of ``g.value`` along each coordinate."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.array(x, dtype=np.float64).reshape(-1)
    steps = h * np.eye(x.size)
    fp = np.asarray(g.value(x + steps), dtype=np.float64)
    fm = np.asarray(g.value(x - steps), dtype=np.float64)
    if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
        raise OracleError("non-finite value in finite difference")
    return (fp - fm) / (2.0 * h)

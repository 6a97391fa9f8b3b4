"""Objective functions with non-smooth pathologies.

All value and gradient callables are vectorized: they take an array whose
trailing axis has length ``dim`` and return one scalar (resp. one ``dim``
vector) per leading index.  They are pure functions of their input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Objective",
    "EdgeRenderScene",
    "WallImpulseScene",
    "ProblemSpecError",
    "make_analytic",
    "heaviside",
    "relu",
    "absolute",
    "quadratic",
    "linear",
    "constant",
    "render_edge",
    "edge_loss",
    "simulate_wall",
    "wall_loss",
    "parse_descriptor",
    "make_problem",
]


@dataclass(frozen=True)
class Objective:
    """A function g on R^d with an optional almost-everywhere gradient.

    ``breakpoints`` lists the 1D locations where ``value`` or ``gradient``
    is discontinuous; the quadrature oracle splits its panels there.
    ``kink_convention`` documents what ``gradient`` returns at those points.
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breakpoints: tuple[float, ...] = ()
    kink_convention: str = ""

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# analytic references

def _first(x):
    return np.asarray(x, dtype=np.float64)[..., 0]


def heaviside() -> Objective:
    """1{x >= 0}.  Exposes no gradient oracle: its a.e. derivative is zero."""
    return Objective(
        "heaviside",
        1,
        lambda x: np.where(_first(x) >= 0.0, 1.0, 0.0),
        None,
        (0.0,),
        "value 1 at x = 0",
    )


def relu() -> Objective:
    return Objective(
        "relu",
        1,
        lambda x: np.maximum(_first(x), 0.0),
        lambda x: np.where(np.asarray(x, dtype=np.float64) >= 0.0, 1.0, 0.0),
        (0.0,),
        "right derivative 1 at x = 0",
    )


def absolute() -> Objective:
    return Objective(
        "abs",
        1,
        lambda x: np.abs(_first(x)),
        lambda x: np.where(np.asarray(x, dtype=np.float64) >= 0.0, 1.0, -1.0),
        (0.0,),
        "right derivative +1 at x = 0",
    )


def quadratic(d: int = 1) -> Objective:
    """sum_i x_i^2."""
    return Objective(
        "quadratic",
        d,
        lambda x: np.sum(np.asarray(x, dtype=np.float64) ** 2, axis=-1),
        lambda x: 2.0 * np.asarray(x, dtype=np.float64),
    )


def linear(a) -> Objective:
    a = np.array(a, dtype=np.float64).reshape(-1)
    a.setflags(write=False)
    return Objective(
        "linear",
        a.size,
        lambda x: np.asarray(x, dtype=np.float64) @ a,
        lambda x: np.broadcast_to(a, np.shape(x)).copy(),
    )


def constant(c: float = 1.0, d: int = 1) -> Objective:
    c = float(c)
    return Objective(
        "constant",
        d,
        lambda x: np.full(np.shape(x)[:-1], c),
        lambda x: np.zeros(np.shape(x)),
    )


_ANALYTIC = {"heaviside": heaviside, "relu": relu, "abs": absolute}


def make_analytic(name: str, d: int = 1) -> Objective:
    """Named reference objective: ``heaviside``, ``relu``, ``abs`` or ``quadratic``."""
    if name == "quadratic":
        return quadratic(d)
    try:
        return _ANALYTIC[name]()
    except KeyError:
        raise ValueError(f"unknown analytic objective {name!r}") from None


# ---------------------------------------------------------------------------
# hard rasterization of a 1D edge

@dataclass(frozen=True)
class EdgeRenderScene:
    """N pixels on (0, 1) with centers (i + 1/2)/N; the edge sits at ``theta_target``."""

    pixels: int = 32
    theta_target: float = 0.8

    def __post_init__(self):
        if self.pixels < 1:
            raise ValueError("pixels must be positive")
        if not 0.0 < self.theta_target < 1.0:
            raise ValueError("theta_target must lie in (0, 1)")

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.pixels) + 0.5) / self.pixels


def render_edge(scene: EdgeRenderScene, theta) -> np.ndarray:
    """Binary image: pixel i is lit iff its center lies left of the edge."""
    theta = np.asarray(theta, dtype=np.float64)
    return (scene.centers < theta[..., None]).astype(np.float64)


def edge_loss(scene: EdgeRenderScene) -> Objective:
    """Mean squared pixel error against the target image.

    The value is a staircase in theta with steps of 1/N, so the gradient is
    zero wherever it exists.
    """
    target = render_edge(scene, scene.theta_target)

    def value(x):
        img = render_edge(scene, _first(x))
        return np.mean((img - target) ** 2, axis=-1)

    return Objective(
        "edge",
        1,
        value,
        lambda x: np.zeros(np.shape(x)),
        tuple(float(c) for c in scene.centers),
        "zero at pixel-center crossings",
    )


# ---------------------------------------------------------------------------
# point mass hitting a sticky wall

@dataclass(frozen=True)
class WallImpulseScene:
    """A mass launched at velocity u from 0 toward a wall that it sticks to."""

    wall: float = 1.0
    horizon: float = 1.0
    target: float = 0.5

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if not 0.0 < self.target < self.wall:
            raise ValueError("target must satisfy 0 < target < wall")


def simulate_wall(scene: WallImpulseScene, u) -> np.ndarray | float:
    """Final position min(u T, wall)."""
    out = np.minimum(np.asarray(u, dtype=np.float64) * scene.horizon, scene.wall)
    return out[()] if np.ndim(out) == 0 else out


def wall_loss(scene: WallImpulseScene) -> Objective:
    """(f(u) - target)^2 with the contact branch giving a flat, nonzero plateau."""
    T, wall, target = scene.horizon, scene.wall, scene.target

    def value(x):
        return (simulate_wall(scene, _first(x)) - target) ** 2

    def gradient(x):
        u = np.asarray(x, dtype=np.float64)
        free = u * T < wall
        return np.where(free, 2.0 * T * (u * T - target), 0.0)

    return Objective(
        "wall",
        1,
        value,
        gradient,
        (wall / T,),
        "zero derivative on contact (u T >= wall)",
    )


# ---------------------------------------------------------------------------
# problem descriptors: ``name`` or ``name:key=val,key=val``
#
#   descriptor := name [ ":" param ( "," param )* ]
#   param      := key "=" value
#   value      := number ( ";" number )*
#   name, key  := [A-Za-z_][A-Za-z0-9_]*

class ProblemSpecError(ValueError):
    """Malformed or unknown problem descriptor; ``position`` is a 0-based offset."""

    def __init__(self, message: str, descriptor: str, position: int):
        self.descriptor = descriptor
        self.position = position
        super().__init__(f"{message} at position {position}: {descriptor!r}")


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


@dataclass
class _Descriptor:
    name: str
    params: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)


def parse_descriptor(text: str) -> tuple[str, dict[str, float | list[float]]]:
    """Split a descriptor into its name and numeric parameters.

    >>> parse_descriptor("edge:N=32,target=0.8")
    ('edge', {'N': 32.0, 'target': 0.8})
    """
    desc = _parse(text)
    return desc.name, desc.params


def _parse(text: str) -> _Descriptor:
    pos = 0
    m = _IDENT.match(text, pos)
    if not m:
        raise ProblemSpecError("expected problem name", text, pos)
    desc = _Descriptor(m.group())
    pos = m.end()
    if pos == len(text):
        return desc
    if text[pos] != ":":
        raise ProblemSpecError("expected ':'", text, pos)
    pos += 1
    while True:
        m = _IDENT.match(text, pos)
        if not m:
            raise ProblemSpecError("expected parameter name", text, pos)
        key, kpos = m.group(), pos
        if key in desc.params:
            raise ProblemSpecError(f"duplicate parameter {key!r}", text, pos)
        pos = m.end()
        if pos >= len(text) or text[pos] != "=":
            raise ProblemSpecError("expected '='", text, pos)
        pos += 1
        values = []
        while True:
            m = _NUMBER.match(text, pos)
            if not m:
                raise ProblemSpecError("expected number", text, pos)
            values.append(float(m.group()))
            pos = m.end()
            if pos < len(text) and text[pos] == ";":
                pos += 1
                continue
            break
        desc.params[key] = values[0] if len(values) == 1 else values
        desc.positions[key] = kpos
        if pos == len(text):
            return desc
        if text[pos] != ",":
            raise ProblemSpecError("expected ',' or end of descriptor", text, pos)
        pos += 1


def _scalar(desc, text, key, default, integer=False):
    v = desc.params.get(key, default)
    if isinstance(v, list):
        raise ProblemSpecError(f"parameter {key!r} must be a scalar", text, desc.positions[key])
    if integer:
        if v != int(v) or v < 1:
            raise ProblemSpecError(
                f"parameter {key!r} must be a positive integer", text, desc.positions.get(key, 0)
            )
        return int(v)
    return float(v)


_ALLOWED = {
    "heaviside": set(),
    "relu": set(),
    "abs": set(),
    "quadratic": {"d"},
    "linear": {"a"},
    "constant": {"c", "d"},
    "edge": {"N", "target"},
    "wall": {"target", "wall", "T"},
}


def make_problem(text: str) -> Objective:
    """Build an objective from a descriptor such as ``wall:target=0.5``.

    Names: heaviside, relu, abs, quadratic:d, linear:a (``;``-separated
    coefficients), constant:c,d, edge:N,target, wall:target,wall,T.
    """
    desc = _parse(text)
    if desc.name not in _ALLOWED:
        raise ProblemSpecError(f"unknown problem {desc.name!r}", text, 0)
    for key, kpos in desc.positions.items():
        if key not in _ALLOWED[desc.name]:
            raise ProblemSpecError(f"unknown parameter {key!r} for {desc.name}", text, kpos)

    name = desc.name
    try:
        if name in _ANALYTIC:
            return _ANALYTIC[name]()
        if name == "quadratic":
            return quadratic(_scalar(desc, text, "d", 1, integer=True))
        if name == "linear":
            if "a" not in desc.params:
                raise ProblemSpecError("linear requires parameter 'a'", text, len(text))
            return linear(desc.params["a"])
        if name == "constant":
            return constant(_scalar(desc, text, "c", 1.0), _scalar(desc, text, "d", 1, integer=True))
        if name == "edge":
            scene = EdgeRenderScene(
                _scalar(desc, text, "N", 32, integer=True), _scalar(desc, text, "target", 0.8)
            )
            return edge_loss(scene)
        scene = WallImpulseScene(
            _scalar(desc, text, "wall", 1.0),
            _scalar(desc, text, "T", 1.0),
            _scalar(desc, text, "target", 0.5),
        )
        return wall_loss(scene)
    except ProblemSpecError:
        raise
    except ValueError as exc:
        raise ProblemSpecError(str(exc), text, len(name)) from None

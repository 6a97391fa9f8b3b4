"""Closed forms, split Simpson quadrature and finite differences.

Reference constants were computed with mpmath at 30 digits:
Phi(0.6) = 0.7257468822499264, phi(0) = 0.3989422804014327.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from randsmooth.oracle import (
    OracleError,
    QuadratureRule,
    closed_form,
    finite_diff,
    quad_smoothed_grad,
    quad_smoothed_value,
    simpson_nodes,
)
from randsmooth.problems import Objective, constant, linear, make_analytic

PHI_0_6 = 0.7257468822499264
PDF_0 = 0.3989422804014327

PROBLEMS = {
    "heaviside": make_analytic("heaviside"),
    "relu": make_analytic("relu"),
    "abs": make_analytic("abs"),
    "quadratic1d": make_analytic("quadratic", 1),
}
GRID = [(float(x), e) for x in np.linspace(-2, 2, 10) for e in (0.1, 0.3, 0.5, 1.0, 2.0)]


def test_rule_validation():
    with pytest.raises(ValueError):
        QuadratureRule(100)
    with pytest.raises(ValueError):
        QuadratureRule(99)
    QuadratureRule(101)


def test_simpson_weights_integrate_density():
    z, w = simpson_nodes(0.0, 1.0, (), QuadratureRule())
    assert np.sum(w) == pytest.approx(16.0, abs=1e-12)
    assert len(z) == 10001


def test_constant_normalization():
    for c in (1.0, -3.5):
        assert quad_smoothed_value(constant(c), 0.4, 0.7) == pytest.approx(c, abs=1e-12)
        assert abs(quad_smoothed_grad(constant(c), 0.4, 0.7)) < 1e-10


def test_heaviside_value():
    assert quad_smoothed_value(PROBLEMS["heaviside"], 0.3, 0.5) == pytest.approx(PHI_0_6, abs=1e-6)
    assert quad_smoothed_value(PROBLEMS["heaviside"], 0.3, 0.5) == pytest.approx(0.725747, abs=1e-6)


def test_quadratic_value():
    assert quad_smoothed_value(PROBLEMS["quadratic1d"], 1.0, 0.3) == pytest.approx(1.09, abs=1e-9)


def test_smoothed_gradients():
    assert quad_smoothed_grad(PROBLEMS["heaviside"], 0.0, 0.5) == pytest.approx(PDF_0 / 0.5, abs=1e-9)
    assert quad_smoothed_grad(PROBLEMS["heaviside"], 0.0, 0.5) == pytest.approx(0.797885, abs=1e-6)
    assert quad_smoothed_grad(PROBLEMS["relu"], 0.0, 1.0) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize(
    "name,x,eps,value,grad",
    [
        ("relu", 0.0, 1.0, PDF_0, 0.5),
        ("abs", 0.0, 1.0, 2 * PDF_0, 0.0),
        ("quadratic1d", 2.0, 0.5, 4.25, 4.0),
        ("heaviside", 0.3, 0.5, PHI_0_6, 2 * math.exp(-0.18) * PDF_0),
    ],
)
def test_closed_form_examples(name, x, eps, value, grad):
    v, g = closed_form(name, x, eps)
    assert v == pytest.approx(value, abs=1e-12)
    assert g == pytest.approx(grad, abs=1e-12)


def test_closed_form_unknown():
    with pytest.raises(ValueError):
        closed_form("sawtooth", 0.0, 1.0)


def _adaptive(g, x, eps, weight):
    """Independent route: scipy's adaptive quadrature on the whole line, split at kinks."""
    f = lambda z: float(g.value(np.array([x + eps * z]))) * weight(z) * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    cut = -x / eps
    a, _ = quad(f, -np.inf, cut, epsabs=1e-13, epsrel=1e-13, limit=200)
    b, _ = quad(f, cut, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
    return a + b


@pytest.mark.parametrize("name", PROBLEMS)
def test_closed_form_against_adaptive_quadrature(name):
    g = PROBLEMS[name]
    for x, eps in [(-1.0, 0.3), (0.0, 1.0), (0.7, 0.5), (1.5, 2.0)]:
        v, d = closed_form(name, x, eps)
        assert _adaptive(g, x, eps, lambda z: 1.0) == pytest.approx(v, abs=1e-9)
        assert _adaptive(g, x, eps, lambda z: z / eps) == pytest.approx(d, abs=1e-9)


@pytest.mark.parametrize("name", PROBLEMS)
def test_cross_oracle_agreement(name):
    g = PROBLEMS[name]
    for x, eps in GRID:
        v, d = closed_form(name, x, eps)
        assert abs(quad_smoothed_value(g, x, eps) - v) < 1e-6
        assert abs(quad_smoothed_grad(g, x, eps) - d) < 1e-6


@pytest.mark.parametrize("name", PROBLEMS)
def test_derivative_consistency(name):
    g = PROBLEMS[name]
    h = 1e-5
    for x, eps in GRID:
        fd = (quad_smoothed_value(g, x + h, eps) - quad_smoothed_value(g, x - h, eps)) / (2 * h)
        assert abs(fd - quad_smoothed_grad(g, x, eps)) < 1e-6


def test_smooth_integrand_relative_accuracy():
    g = Objective("cubic", 1, lambda x: x[..., 0] ** 3 + 2.0)
    # E[(x + eps Z)^3] = x^3 + 3 x eps^2
    x, eps = 1.3, 0.4
    exact = x**3 + 3 * x * eps**2 + 2.0
    assert abs(quad_smoothed_value(g, x, eps) - exact) / exact < 1e-8


def test_coarse_rule_misses_tolerance_on_heaviside():
    worst = max(
        abs(quad_smoothed_value(PROBLEMS["heaviside"], x, e, QuadratureRule(101)) - closed_form("heaviside", x, e)[0])
        for x, e in GRID
    )
    assert worst > 1e-6


def test_smoothed_heaviside_strictly_increasing():
    xs = np.linspace(-1.0, 1.0, 41)
    vals = [quad_smoothed_value(PROBLEMS["heaviside"], x, 0.5) for x in xs]
    assert np.all(np.diff(vals) > 0)
    # the raw function is flat on both sides of the jump
    raw = PROBLEMS["heaviside"].value(xs[:, None])
    assert np.all(np.diff(raw)[xs[1:] < 0] == 0)


def test_non_finite_objective():
    bad = Objective("bad", 1, lambda x: np.where(x[..., 0] > 3, np.inf, 0.0))
    with pytest.raises(OracleError):
        quad_smoothed_value(bad, 0.0, 1.0)


def test_quadrature_rejects_multidim():
    with pytest.raises(ValueError):
        quad_smoothed_value(make_analytic("quadratic", 2), 0.0, 1.0)


def test_finite_diff_examples():
    np.testing.assert_allclose(finite_diff(make_analytic("quadratic", 2), [1.0, 1.0], 1e-6), [2.0, 2.0], atol=1e-4)
    for x in ([0.0, 0.0], [5.0, -2.0]):
        np.testing.assert_allclose(finite_diff(linear([3.0, -1.0]), x, 1e-3), [3.0, -1.0], atol=1e-9)
    assert finite_diff(make_analytic("heaviside"), [0.5], 1e-3)[0] == 0.0


def test_finite_diff_errors():
    with pytest.raises(ValueError):
        finite_diff(linear([1.0]), [0.0], 0.0)
    with pytest.raises(OracleError):
        finite_diff(Objective("nan", 1, lambda x: x[..., 0] * np.nan), [0.0], 1e-3)

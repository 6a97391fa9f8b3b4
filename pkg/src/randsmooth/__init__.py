"""Randomized smoothing of non-smooth objectives.

Monte-Carlo estimates of the smoothed value E[g(x + eps Z)], its
score-function (zeroth-order) and averaged-gradient (first-order) gradient
estimators, deterministic oracles to check them against, toy problems with
null or undefined gradients, and a small gradient-descent driver.
"""

from .estimators import (
    GradientEstimate,
    NonFiniteError,
    SmoothingConfig,
    UnsupportedEstimatorError,
    ValueEstimate,
    grad_first,
    grad_zeroth,
    grad_zeroth_baseline,
    smoothed_value,
)
from .noise import NoiseDistribution, RngStream, log_density, sample, sample_block, score
from .optimize import DescentConfig, DivergenceError, Trajectory, run_descent
from .oracle import QuadratureRule, closed_form, finite_diff, quad_smoothed_grad, quad_smoothed_value
from .problems import (
    EdgeRenderScene,
    Objective,
    WallImpulseScene,
    edge_loss,
    make_analytic,
    make_problem,
    render_edge,
    simulate_wall,
    wall_loss,
)

__version__ = "0.1.0"

"""Smoothing a step function.

The Heaviside step has a zero derivative everywhere except at the jump, where
it is undefined.  Its Gaussian-smoothed counterpart is the normal CDF, whose
derivative is an informative bell curve.  This script compares the
Monte-Carlo estimators with the exact values and with quadrature.

    python demos/01_smoothing_a_step.py
"""

import numpy as np

from randsmooth import SmoothingConfig, grad_zeroth, grad_zeroth_baseline, make_analytic, smoothed_value
from randsmooth.oracle import closed_form, quad_smoothed_grad, quad_smoothed_value

step = make_analytic("heaviside")
eps = 0.5

print("x      g(x)  g_eps exact  g_eps quad   g_eps MC (+-se)      grad exact  grad MC (+-se)")
for x in np.linspace(-1.5, 1.5, 7):
    cfg = SmoothingConfig(eps, 20_000, seed=1)
    value = smoothed_value(step, [x], cfg)
    grad = grad_zeroth(step, [x], cfg)
    v, d = closed_form("heaviside", x, eps)
    print(
        f"{x:+.2f}  {step([x]):.0f}     {v:.6f}     {quad_smoothed_value(step, x, eps):.6f}   "
        f"{value.mean:.4f} ({value.stderr:.4f})   {d:.6f}    {grad.mean[0]:.4f} ({grad.stderr[0]:.4f})"
    )

# the raw derivative is useless, the smoothed one is not
print("\nquadrature gradient at x=0:", quad_smoothed_grad(step, 0.0, eps))

# a baseline leaves the expectation unchanged
cfg = SmoothingConfig(eps, 20_000, seed=2)
plain = grad_zeroth(step, [0.3], cfg)
base = grad_zeroth_baseline(step, [0.3], cfg)
print(f"at x=0.3: plain {plain.mean[0]:.4f} +- {plain.stderr[0]:.4f}, baseline {base.mean[0]:.4f} +- {base.stderr[0]:.4f}")

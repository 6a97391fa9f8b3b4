"""How the two gradient estimators trade bias for variance.

Both estimators target the gradient of the smoothed objective.  The
zeroth-order one only queries values and its variance grows like 1/eps^2;
the first-order one averages gradients and stays well behaved as eps
shrinks, as long as the objective's own gradient is informative.

    python demos/02_estimator_variance.py
"""

import math

from randsmooth import SmoothingConfig, grad_first, grad_zeroth, grad_zeroth_baseline, make_analytic

quad = make_analytic("quadratic", 1)
relu = make_analytic("relu")

print("quadratic at x=1 (true smoothed gradient 2 for every eps), M = 10000")
print("eps     zeroth se   baseline se   first se")
for eps in (1.0, 0.3, 0.1, 0.03):
    cfg = SmoothingConfig(eps, 10_000, seed=0)
    z, b, f = (fn(quad, [1.0], cfg) for fn in (grad_zeroth, grad_zeroth_baseline, grad_first))
    print(f"{eps:<6}  {z.stderr[0]:<10.4f}  {b.stderr[0]:<12.4f}  {f.stderr[0]:.4f}")

print("\nMonte-Carlo rate on relu at x=0, eps=1 (first order)")
prev = None
for m in (100, 1_000, 10_000, 100_000):
    se = grad_first(relu, [0.0], SmoothingConfig(1.0, m, seed=3)).stderr[0]
    ratio = "" if prev is None else f"  ratio {se / prev:.3f} (ideal {1 / math.sqrt(10):.3f})"
    print(f"M={m:<7} stderr {se:.5f}{ratio}")
    prev = se

"""Smoothed gradients carry information where the raw ones vanish."""

import numpy as np

from randsmooth.estimators import SmoothingConfig, grad_first, grad_zeroth
from randsmooth.problems import EdgeRenderScene, WallImpulseScene, edge_loss, wall_loss


def test_zeroth_points_toward_edge_target():
    rng = np.random.default_rng(2)
    n = 32
    decided = 0
    for k in range(50):
        target = rng.uniform(0.15, 0.85)
        far = 0.0 if target > 0.5 else 1.0
        theta = 0.5 * (target + far)
        est = grad_zeroth(edge_loss(EdgeRenderScene(n, target)), [theta], SmoothingConfig(2 / n, 10_000, seed=k))
        if abs(est.mean[0]) > 4 * est.stderr[0]:
            decided += 1
            # the descent direction -mean points from theta toward the target
            assert np.sign(-est.mean[0]) == np.sign(target - theta)
    assert decided >= 45


def test_first_order_informative_past_the_wall():
    scene = WallImpulseScene(target=0.5)
    eps = 0.2
    u = scene.wall / scene.horizon + 0.5 * eps
    g = wall_loss(scene)
    assert g.gradient(np.array([u]))[0] == 0.0
    est = grad_first(g, [u], SmoothingConfig(eps, 10_000, seed=0))
    assert est.mean[0] > 4 * est.stderr[0]  # descent step -mean moves u back toward the target

"""Fitting an edge through a hard rasterizer.

A 1D "image" of N pixels is lit left of an edge at theta.  The pixel loss is
a staircase in theta, so its derivative is zero wherever it exists and plain
gradient descent never moves.  The zeroth-order estimator with a baseline
only needs loss values and pulls theta onto the target edge.

    python demos/03_edge_rendering.py
"""

import numpy as np

from randsmooth import DescentConfig, EdgeRenderScene, SmoothingConfig, edge_loss, render_edge, run_descent

scene = EdgeRenderScene(pixels=32, theta_target=0.8)
loss = edge_loss(scene)
print("target image:", "".join("#" if p else "." for p in render_edge(scene, scene.theta_target)))
print("start image: ", "".join("#" if p else "." for p in render_edge(scene, 0.2)))

raw = run_descent(loss, [0.2], DescentConfig(step_size=0.5, max_iters=200))
print(f"\nraw gradient: theta stays at {raw.final.x[0]} (loss {raw.final.value})")

# small steps settle on the edge; large steps reach it fast but then rattle around it
for step in (0.05, 0.5):
    cfg = DescentConfig(step, 500, "zeroth_baseline", SmoothingConfig(0.1, 256, seed=0))
    traj = run_descent(loss, [0.2], cfg)
    dist = np.abs(traj.xs[:, 0] - scene.theta_target)
    first = int(np.argmax(dist < 2 / scene.pixels))
    print(
        f"smoothed, step {step}: within 2/N after {first} iterations, "
        f"final theta {traj.final.x[0]:.4f}, final loss {traj.final.value:.4f}"
    )

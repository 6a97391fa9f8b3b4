"""Escaping a contact plateau.

A mass launched with velocity u sticks to a wall at position 1.  For any u
past the wall the final position, and so the loss, is constant: the
simulator's gradient is exactly zero although the target (0.5) is missed.
Averaging gradients over perturbed launches picks up the samples that land
in front of the wall.  The escape speed depends on how much of the noise
reaches over the wall edge, and the smoothed minimiser is biased by the
same amount, so eps trades speed for accuracy.

    python demos/04_wall_contact.py
"""

from randsmooth import DescentConfig, SmoothingConfig, WallImpulseScene, run_descent, wall_loss

loss = wall_loss(WallImpulseScene(wall=1.0, horizon=1.0, target=0.5))

raw = run_descent(loss, [2.0], DescentConfig(0.5, 300))
print(f"raw gradient: u stays at {raw.final.x[0]}, loss {raw.final.value}")

print("\neps    step  M     first iter with loss<0.01   final u   final loss")
for eps, step, m in [(0.3, 0.5, 256), (0.33, 0.75, 1024), (0.4, 1.0, 256), (0.6, 0.5, 256)]:
    traj = run_descent(loss, [2.0], DescentConfig(step, 300, "first", SmoothingConfig(eps, m, seed=0)))
    below = [it.iteration for it in traj.iterates if it.value < 0.01]
    first = below[0] if below else "never"
    print(f"{eps:<6} {step:<5} {m:<5} {first!s:<27} {traj.final.x[0]:.4f}    {traj.final.value:.5f}")

"""The two regularized Heavisides and the narrow-band freeze.

The arctan ramp H1 never saturates, so every bump stays coupled to the data
misfit everywhere.  The compact C^2 ramp H2 is exactly 0/1 outside a band
of half-width eps; its delta vanishes outside |phi - c| < eps, so bumps
whose support misses that band receive exactly-zero sensitivity columns and
are frozen for the iteration.  This script plots both ramps and marks the
frozen bump of a six-bump configuration.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from palstomo import Grid2D, PalsModel, active_bumps, eval_phi
from palstomo.pals import delta_value, heaviside_value

OUT = Path("out/demos")
OUT.mkdir(parents=True, exist_ok=True)

eps = 0.1
t = np.linspace(-0.5, 0.5, 1000)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
ax1.plot(t, heaviside_value("H1", eps, t), label="H1 (arctan)")
ax1.plot(t, heaviside_value("H2", eps, t), label="H2 (compact)")
ax1.axvspan(-eps, eps, alpha=0.15, color="gray")
ax1.legend()
ax1.set_title("regularized Heavisides")
ax2.plot(t, delta_value("H1", eps, t), label="delta1")
ax2.plot(t, delta_value("H2", eps, t), label="delta2")
ax2.legend()
ax2.set_title("their derivatives")
fig.tight_layout()
fig.savefig(OUT / "heavisides.png", dpi=150)

# six bumps, one of them isolated: under H2 it misses the band and freezes
centers = np.array([[0.0, 0.05], [0.3, 0.0], [-0.25, 0.1],
                    [0.05, -0.3], [-0.1, 0.28], [1.5, 1.5]])
weights = np.array([0.3, 0.25, 0.27, 0.26, 0.24, -0.22])
model = PalsModel(weights=weights, dilations=np.full(6, 1.5), centers=centers,
                  contrast_in=2.0, contrast_out=1.0, level=0.15, epsilon=eps,
                  norm_smoothing=1e-4)
grid = Grid2D.uniform((-2.3, 2.3), (-2.3, 2.3), 300, 300)
phi = eval_phi(model, grid)
act = set(active_bumps(model, grid))
print("active bumps under H2:", sorted(act), "- frozen:", sorted(set(range(6)) - act))
print("active bumps under H1:", sorted(active_bumps(model.replace(heaviside='H1'), grid)))

X, Y = grid.center_mesh
fig, ax = plt.subplots(figsize=(5.5, 5))
ax.contourf(X, Y, np.abs(phi - model.level) < eps, levels=[0.5, 1.5],
            colors=["#ffd9a0"])
ax.contour(X, Y, phi, levels=[model.level], colors="k")
for j, (cx, cy) in enumerate(centers):
    rad = 1.0 / model.dilations[j]
    color = "C0" if j in act else "C3"
    ax.add_patch(plt.Circle((cx, cy), rad, fill=False, color=color, lw=1.5))
    ax.annotate("frozen" if j not in act else f"{j}", (cx, cy),
                ha="center", color=color)
ax.set_aspect("equal")
ax.set_title("band |phi - c| < eps (shaded), bump supports")
fig.tight_layout()
fig.savefig(OUT / "narrow_band.png", dpi=150)
print(f"wrote {OUT}/heavisides.png, narrow_band.png")

"""Compactly supported bumps and the shapes their level sets can carve.

A level set function built from a handful of weighted compact radial bumps
behaves "pseudo-logically" near a low level c: strongly positive bumps add
their support disks almost like a union, and a strongly negative bump
subtracts its disk, which is how a couple of terms can make crescents,
corners and holes.  This script reproduces the two-bump crescent for a
range of negative weights and a five-bump square-ish shape.

Writes PNG figures into out/demos/ (requires matplotlib).
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from palstomo import Grid2D, PalsModel, WendlandKernel, eval_phi

OUT = Path("out/demos")
OUT.mkdir(parents=True, exist_ok=True)

kernel = WendlandKernel(1, 1)   # (1-r)^3 (3r+1), C^2

# --- profile of the kernel family ------------------------------------------
r = np.linspace(0, 1.2, 400)
fig, ax = plt.subplots(figsize=(5, 3.2))
for l in (1, 2, 3):
    k = WendlandKernel(1, l)
    ax.plot(r, k(r) / k(0.0), label=f"smoothness l={l} (C^{2 * l})")
ax.axvline(1.0, color="k", lw=0.5)
ax.set_xlabel("scaled radius r")
ax.set_ylabel("kernel value (normalized)")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "kernels.png", dpi=150)

# --- two bumps: crescent from a negative weight ----------------------------
grid = Grid2D.uniform((-1.5, 1.5), (-1.5, 1.5), 400, 400)
X, Y = grid.center_mesh
c = 0.01

fig, ax = plt.subplots(figsize=(5, 5))
for alpha2, style in ((-0.2, "C0"), (-1.0, "C1"), (-50.0, "C3")):
    model = PalsModel(weights=[1.0, alpha2], dilations=[1.0, 1.0],
                      centers=[[-0.25, -0.25], [0.4, 0.4]],
                      contrast_in=1.0, contrast_out=0.0,
                      level=c, epsilon=0.005, norm_smoothing=1e-6,
                      kernel=kernel)
    phi = eval_phi(model, grid)
    ax.contour(X, Y, phi, levels=[c], colors=style)
    ax.plot([], [], style, label=f"second weight = {alpha2}")
ax.plot(-0.25, -0.25, "k+", ms=10)
ax.plot(0.4, 0.4, "k_", ms=10)
ax.set_aspect("equal")
ax.legend(loc="lower left")
ax.set_title(f"c = {c} level set of bump1 + w * bump2")
fig.tight_layout()
fig.savefig(OUT / "crescent.png", dpi=150)

# --- five bumps: a square with corners --------------------------------------
centers = np.array([[0.0, 0.0], [0.9, 0.9], [-0.9, 0.9], [0.9, -0.9], [-0.9, -0.9]])
weights = np.array([1.0, -8.0, -8.0, -8.0, -8.0])
model = PalsModel(weights=weights, dilations=np.full(5, 0.85), centers=centers,
                  contrast_in=1.0, contrast_out=0.0, level=c,
                  epsilon=0.005, norm_smoothing=1e-6, kernel=kernel)
phi = eval_phi(model, grid)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
im = ax1.pcolormesh(X, Y, phi, shading="auto")
fig.colorbar(im, ax=ax1)
ax1.contour(X, Y, phi, levels=[c], colors="w")
ax1.set_aspect("equal")
ax1.set_title("level set function")
ax2.pcolormesh(X, Y, (phi >= c).astype(float), shading="auto", cmap="gray")
ax2.set_aspect("equal")
ax2.set_title("its c-superlevel set: 5 bumps, 4 negative")
fig.tight_layout()
fig.savefig(OUT / "square_from_five_bumps.png", dpi=150)

print(f"wrote {OUT}/kernels.png, crescent.png, square_from_five_bumps.png")

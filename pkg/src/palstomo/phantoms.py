"""Piecewise-constant test phantoms and shape-recovery metrics.

A phantom is an ordered list of primitives painted onto the grid: ``add``
marks cells inside the primitive, ``subtract`` clears them again.  A cell
counts as inside a primitive iff its *center* is inside.  The built-in
shapes mimic the qualitative features of the survey benchmarks (a blob with
a downward concavity for ERT, a multi-lobed shape with a hole for CT, two
separated blobs for DOT); they are stand-ins, not pixel replicas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import pals
from .grids import Grid2D
from .pals import PalsModel


@dataclass(frozen=True)
class Primitive:
    kind: str                 # "disc" | "rect"
    op: str = "add"           # "add" | "subtract"
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)  # x0,x1,y0,y1

    def __post_init__(self):
        if self.kind not in ("disc", "rect"):
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        if self.op not in ("add", "subtract"):
            raise ValueError(f"unknown primitive op {self.op!r}")

    def contains(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        if self.kind == "disc":
            return (X - self.center[0]) ** 2 + (Y - self.center[1]) ** 2 <= self.radius ** 2
        x0, x1, y0, y1 = self.bounds
        return (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)


@dataclass
class Phantom:
    primitives: list[Primitive]
    contrast_in: float
    contrast_out: float
    description: str = ""

    def mask(self, grid: Grid2D) -> np.ndarray:
        X, Y = grid.center_mesh
        inside = np.zeros(grid.shape, dtype=bool)
        for prim in self.primitives:
            hit = prim.contains(X, Y)
            if prim.op == "add":
                inside |= hit
            else:
                inside &= ~hit
        return inside

    def field(self, grid: Grid2D) -> np.ndarray:
        m = self.mask(grid)
        return np.where(m, self.contrast_in, self.contrast_out)


def disc(cx, cy, r, op="add") -> Primitive:
    return Primitive("disc", op, center=(cx, cy), radius=r)


def rect(x0, x1, y0, y1, op="add") -> Primitive:
    return Primitive("rect", op, bounds=(x0, x1, y0, y1))


# ---------------------------------------------------------------------------
# built-ins

def ert_concave_blob() -> list[Primitive]:
    """Conductive blob in the imaging window with a concavity that opens
    toward the unsensed bottom."""
    return [
        disc(0.0, -0.38, 0.30),
        disc(-0.20, -0.52, 0.20),
        disc(0.20, -0.52, 0.20),
        disc(0.0, -0.70, 0.17, op="subtract"),
    ]


def ert_concavity_probe() -> Primitive:
    """Region in the mouth of the concavity that a good reconstruction must
    leave outside the shape."""
    return disc(0.0, -0.72, 0.07)


def ct_lobed_shape() -> list[Primitive]:
    """Three overlapping lobes with a central hole."""
    return [
        disc(-0.28, 0.28, 0.38),
        disc(0.36, 0.12, 0.33),
        disc(0.02, -0.34, 0.36),
        disc(0.03, 0.02, 0.15, op="subtract"),
    ]


def dot_two_blobs() -> list[Primitive]:
    """Two well separated absorbers."""
    return [
        disc(1.55, 3.15, 0.70),
        disc(3.50, 1.80, 0.65),
    ]


BUILTIN_SHAPES = {
    "ert_concave": ert_concave_blob,
    "ct_lobes": ct_lobed_shape,
    "dot_two_blobs": dot_two_blobs,
}


# ---------------------------------------------------------------------------
# metrics

def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    """Cell-counting Jaccard index of two boolean masks (1.0 if both empty)."""
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return float(np.count_nonzero(a & b)) / union


def recovered_mask(recon, grid: Grid2D, level: float | None = None,
                   contrasts: tuple[float, float] | None = None) -> np.ndarray:
    """Inside mask of a reconstruction.

    For a :class:`PalsModel` this is the superlevel set ``phi >= level``;
    for a property image, cells above the contrast midpoint.
    """
    if isinstance(recon, PalsModel):
        phi = pals.eval_phi(recon, grid)
        return phi >= (recon.level if level is None else level)
    recon = np.asarray(recon)
    if contrasts is None:
        thr = 0.5 * (recon.min() + recon.max())
    else:
        thr = 0.5 * (contrasts[0] + contrasts[1])
    return recon >= thr


def shape_metrics(recon, phantom: Phantom, grid: Grid2D) -> dict:
    """Jaccard index and symmetric-difference fraction of a reconstruction
    against the phantom truth, plus the recovered contrasts when the
    reconstruction is a PaLS model.  The symmetric difference is reported as
    a fraction of the true shape's cell count."""
    truth = phantom.mask(grid)
    rec = recovered_mask(recon, grid)
    out = {
        "jaccard": jaccard(rec, truth),
        "symm_diff_fraction": float(np.count_nonzero(rec ^ truth))
                              / max(int(np.count_nonzero(truth)), 1),
    }
    if isinstance(recon, PalsModel):
        out["contrast_in"] = recon.contrast_in
        out["contrast_out"] = recon.contrast_out
    return out

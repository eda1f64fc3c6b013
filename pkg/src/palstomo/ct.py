"""Parallel-beam monoenergetic X-ray CT forward model.

Measurements are line integrals of the attenuation image over a pixel grid,

    u_k = sum_cells  len(ray_k, cell) * attenuation[cell],

with exact ray/cell intersection lengths from a Siddon-style traversal, so
the model is a fixed sparse linear operator.  For projection angle theta the
detector array axis points along ``(cos t, sin t)`` and rays travel along
``(-sin t, cos t)``; the array holds ``n_detectors`` equally spaced lateral
offsets spanning the domain width (offsets at pitch centers).  The region
outside the grid contributes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .forward import ForwardModel
from .grids import Grid2D

# pulls each lateral offset infinitesimally toward the array center so no
# ray can run exactly along a grid line (keeps traversal symmetric in +/-s)
_OFFSET_NUDGE = 1.0 - 1e-12


@dataclass(eq=False)
class CtGeometry:
    """Scan geometry: imaging rectangle, detector count, projection angles."""

    xlim: tuple[float, float] = (-1.0, 1.0)
    ylim: tuple[float, float] = (-1.0, 1.0)
    n_detectors: int = 34
    angles: np.ndarray = field(default_factory=lambda: full_view_angles())

    def __post_init__(self):
        self.angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if self.angles.size == 0:
            raise ValueError("need at least one projection angle")
        if self.n_detectors < 2:
            raise ValueError("need at least two detectors")

    @property
    def n_rays(self) -> int:
        return self.angles.size * self.n_detectors

    def offsets(self) -> np.ndarray:
        """Lateral detector offsets from the domain center."""
        w = self.xlim[1] - self.xlim[0]
        pitch = w / self.n_detectors
        s = -0.5 * w + (np.arange(self.n_detectors) + 0.5) * pitch
        return s * _OFFSET_NUDGE

    def rays(self) -> tuple[np.ndarray, np.ndarray]:
        """All ray (origin, direction) pairs, angle-major then detector."""
        cx = 0.5 * (self.xlim[0] + self.xlim[1])
        cy = 0.5 * (self.ylim[0] + self.ylim[1])
        s = self.offsets()
        origins = []
        dirs = []
        for th in self.angles:
            ax = np.array([np.cos(th), np.sin(th)])
            d = np.array([-np.sin(th), np.cos(th)])
            for sk in s:
                origins.append([cx + sk * ax[0], cy + sk * ax[1]])
                dirs.append(d)
        return np.asarray(origins), np.asarray(dirs)


def full_view_angles(step_deg: float = 1.0) -> np.ndarray:
    """Angles strictly inside (0, pi) on a regular step."""
    return np.deg2rad(np.arange(step_deg, 180.0, step_deg))


def limited_view_angles(step_deg: float = 1.0) -> np.ndarray:
    """Angles strictly inside (pi/4, 3 pi/4) on a regular step."""
    return np.deg2rad(np.arange(45.0 + step_deg, 135.0, step_deg))


def _trace_ray(ox, oy, dx, dy, x_edges, y_edges):
    """Cells crossed by one ray and the intersection lengths.

    Returns (flat_cell_indices, lengths); empty arrays if the ray misses the
    grid.  Directions are unit vectors, so parameter differences are lengths.
    """
    tmin, tmax = -np.inf, np.inf
    for o, d, lo, hi in ((ox, dx, x_edges[0], x_edges[-1]),
                         (oy, dy, y_edges[0], y_edges[-1])):
        if abs(d) < 1e-300:
            if not (lo <= o <= hi):
                return np.empty(0, dtype=np.int64), np.empty(0)
        else:
            ta, tb = (lo - o) / d, (hi - o) / d
            tmin = max(tmin, min(ta, tb))
            tmax = min(tmax, max(ta, tb))
    if not tmax > tmin:
        return np.empty(0, dtype=np.int64), np.empty(0)
    ts = [np.array([tmin, tmax])]
    if abs(dx) >= 1e-300:
        tx = (x_edges - ox) / dx
        ts.append(tx[(tx > tmin) & (tx < tmax)])
    if abs(dy) >= 1e-300:
        ty = (y_edges - oy) / dy
        ts.append(ty[(ty > tmin) & (ty < tmax)])
    t = np.unique(np.concatenate(ts))
    lengths = np.diff(t)
    tm = 0.5 * (t[:-1] + t[1:])
    xi = np.searchsorted(x_edges, ox + tm * dx, side="right") - 1
    yi = np.searchsorted(y_edges, oy + tm * dy, side="right") - 1
    ny = y_edges.size - 1
    keep = (xi >= 0) & (xi < x_edges.size - 1) & (yi >= 0) & (yi < ny) & (lengths > 0)
    return (xi[keep] * ny + yi[keep]).astype(np.int64), lengths[keep]


def trace_matrix(geom: CtGeometry, grid: Grid2D) -> sp.csr_matrix:
    """Sparse ray-length matrix A with A[k, cell] = intersection length."""
    origins, dirs = geom.rays()
    rows, cols, vals = [], [], []
    for k in range(origins.shape[0]):
        cells, lens = _trace_ray(origins[k, 0], origins[k, 1],
                                 dirs[k, 0], dirs[k, 1],
                                 grid.x_edges, grid.y_edges)
        rows.append(np.full(cells.size, k, dtype=np.int64))
        cols.append(cells)
        vals.append(lens)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(geom.n_rays, grid.n_cells))


def ct_forward(geom: CtGeometry, grid: Grid2D, attenuation: np.ndarray) -> np.ndarray:
    """Line-integral data for one attenuation image."""
    return trace_matrix(geom, grid) @ np.asarray(attenuation, dtype=float).ravel()


class CtModel(ForwardModel):
    """Linear CT model; the sensitivity is the constant ray-length matrix."""

    def __init__(self, geom: CtGeometry, grid: Grid2D):
        self.geom = geom
        self.grid = grid
        self.matrix = trace_matrix(geom, grid)

    @property
    def data_size(self) -> int:
        return self.geom.n_rays

    def forward(self, p: np.ndarray) -> np.ndarray:
        p = self._check_grid(p)
        return self.matrix @ p.ravel()

    def sensitivity(self, p: np.ndarray) -> sp.csr_matrix:
        # linear model: independent of the attenuation argument
        return self.matrix

"""Tensor-product rectangular grids with cell-centered fields.

A :class:`Grid2D` is defined by strictly increasing edge coordinates along
each axis and may have non-uniform spacing.  All fields in this package are
arrays of shape ``(nx, ny)`` holding one value per cell, indexed so that
``field[i, j]`` lives at the cell center ``(x_centers[i], y_centers[j])``.
Flattened vectors use C order (x-major).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(eq=False)
class Grid2D:
    """Rectangular grid given by cell edge coordinates along each axis."""

    x_edges: np.ndarray
    y_edges: np.ndarray

    def __post_init__(self):
        self.x_edges = np.asarray(self.x_edges, dtype=float)
        self.y_edges = np.asarray(self.y_edges, dtype=float)
        for name, edges in (("x_edges", self.x_edges), ("y_edges", self.y_edges)):
            if edges.ndim != 1 or edges.size < 2:
                raise ValueError(f"{name} needs at least 2 entries")
            if not np.all(np.diff(edges) > 0):
                raise ValueError(f"{name} must be strictly increasing")

    @classmethod
    def uniform(cls, xlim, ylim, nx, ny):
        """Uniform grid with ``nx`` by ``ny`` cells over the given bounds."""
        return cls(np.linspace(xlim[0], xlim[1], nx + 1),
                   np.linspace(ylim[0], ylim[1], ny + 1))

    @property
    def nx(self) -> int:
        return self.x_edges.size - 1

    @property
    def ny(self) -> int:
        return self.y_edges.size - 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @cached_property
    def dx(self) -> np.ndarray:
        return np.diff(self.x_edges)

    @cached_property
    def dy(self) -> np.ndarray:
        return np.diff(self.y_edges)

    @cached_property
    def x_centers(self) -> np.ndarray:
        return 0.5 * (self.x_edges[:-1] + self.x_edges[1:])

    @cached_property
    def y_centers(self) -> np.ndarray:
        return 0.5 * (self.y_edges[:-1] + self.y_edges[1:])

    @cached_property
    def center_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates as two ``(nx, ny)`` arrays."""
        return np.meshgrid(self.x_centers, self.y_centers, indexing="ij")

    @cached_property
    def cell_areas(self) -> np.ndarray:
        return np.outer(self.dx, self.dy)

    @property
    def min_spacing(self) -> float:
        return float(min(self.dx.min(), self.dy.min()))

    @property
    def xlim(self) -> tuple[float, float]:
        return (float(self.x_edges[0]), float(self.x_edges[-1]))

    @property
    def ylim(self) -> tuple[float, float]:
        return (float(self.y_edges[0]), float(self.y_edges[-1]))

    @property
    def diagonal(self) -> float:
        wx = self.x_edges[-1] - self.x_edges[0]
        wy = self.y_edges[-1] - self.y_edges[0]
        return float(np.hypot(wx, wy))

    def subgrid(self, ix: slice, iy: slice) -> "Grid2D":
        """Grid restricted to a contiguous block of cells."""
        xs = self.x_edges[ix.start:ix.stop + 1]
        ys = self.y_edges[iy.start:iy.stop + 1]
        return Grid2D(xs, ys)

    def nearest_cell(self, x: float, y: float) -> tuple[int, int]:
        """Index of the cell whose center is closest to ``(x, y)``."""
        i = int(np.argmin(np.abs(self.x_centers - x)))
        j = int(np.argmin(np.abs(self.y_centers - y)))
        return i, j

    def flat_index(self, i: int, j: int) -> int:
        return i * self.ny + j


def graded_axis(inner_lo: float, inner_hi: float, n_inner: int,
                pad_lo: float = 0.0, n_pad_lo: int = 0,
                pad_hi: float = 0.0, n_pad_hi: int = 0) -> np.ndarray:
    """Edge coordinates for an axis with a uniform core and linearly
    coarsening pads.

    The core ``[inner_lo, inner_hi]`` is split into ``n_inner`` equal cells of
    width ``h0``.  Each pad is split into cells whose widths grow linearly
    away from the core, ``h_k = h0 + k*d``, with ``d`` chosen so the pad width
    is matched exactly.  Spacings are therefore non-decreasing with distance
    from the core.
    """
    h0 = (inner_hi - inner_lo) / n_inner
    parts = []
    if n_pad_lo:
        steps = _graded_spacings(h0, pad_lo, n_pad_lo)
        parts.append(inner_lo - np.concatenate(([0.0], np.cumsum(steps)))[::-1])
    else:
        parts.append(np.array([inner_lo]))
    parts.append(np.linspace(inner_lo, inner_hi, n_inner + 1)[1:])
    if n_pad_hi:
        steps = _graded_spacings(h0, pad_hi, n_pad_hi)
        parts.append(inner_hi + np.cumsum(steps))
    edges = np.concatenate(parts)
    return edges


def _graded_spacings(h0: float, width: float, n: int) -> np.ndarray:
    if width < n * h0:
        raise ValueError("pad too narrow for linear coarsening from the core spacing")
    d = 2.0 * (width - n * h0) / (n * (n + 1))
    return h0 + d * np.arange(1, n + 1)


def interpolate_to(grid_from: Grid2D, values: np.ndarray, grid_to: Grid2D) -> np.ndarray:
    """Bilinear interpolation of a cell-centered field onto another grid's
    cell centers.  Target centers must lie within the source center hull."""
    from scipy.interpolate import RegularGridInterpolator
    interp = RegularGridInterpolator(
        (grid_from.x_centers, grid_from.y_centers), values, method="linear")
    X, Y = grid_to.center_mesh
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return interp(pts).reshape(grid_to.shape)

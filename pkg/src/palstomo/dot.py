"""Frequency-domain diffuse optical tomography.

The photon flux u at modulation frequency omega solves

    -div( beta grad u ) + alpha u + i (omega / v) u = s    in the square,

with Robin boundary condition ``u + 2 beta du/dn = 0`` on all walls, where
``beta = 1 / (3 mu_s')`` is the diffusion coefficient from the (known)
reduced scattering, ``alpha`` the absorption image to be recovered and ``v``
the speed of light in the medium.  The cell-centered 5-point scheme
eliminates a mirrored ghost node per boundary face, which adds a real
diagonal term and keeps the assembled operator complex-symmetric
(A^T = A, not Hermitian).

Point sources sit on the top boundary cells and detectors on the bottom
boundary cells; every (frequency, source) pair is one experiment and the
data vector stacks all (frequency, source, detector) triples in that order.
With measurement ``m = u_s[detector]`` the exact discrete sensitivity is

    d m / d alpha_c = - u_s(c) * u_d(c) * area_c          (no conjugation),

where ``u_d`` is the adjoint field of a unit source at the detector cell.
All lengths are in cm and coefficients in 1/cm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .forward import ForwardModel, SolverFailure
from .grids import Grid2D

C0_CM_PER_S = 2.99792458e10
REFRACTIVE_INDEX = 1.37
DEFAULT_FREQUENCIES_HZ = (0.0, 25e6, 50e6)


def assemble_dot_operator(grid: Grid2D, absorption: np.ndarray,
                          diffusion: float, wavenumber: float) -> sp.csc_matrix:
    """Complex-symmetric matrix for the integrated 5-point scheme.

    ``wavenumber`` is ``omega / v`` (1/length); pass 0 for DC.
    """
    absorption = np.asarray(absorption, dtype=float)
    if absorption.shape != grid.shape:
        raise ValueError("absorption shape does not match the grid")
    if np.any(absorption <= 0):
        raise ValueError("absorption must be positive everywhere")
    nx, ny = grid.shape
    dx, dy = grid.dx, grid.dy
    idx = np.arange(nx * ny).reshape(nx, ny)
    diag = np.zeros((nx, ny))
    rows, cols, vals = [], [], []

    tx = diffusion * dy[None, :] / (0.5 * dx[:-1, None] + 0.5 * dx[1:, None])
    Tx = np.broadcast_to(tx, (nx - 1, ny))
    lo, hi = idx[:-1, :].ravel(), idx[1:, :].ravel()
    rows += [lo, hi]
    cols += [hi, lo]
    vals += [-Tx.ravel(), -Tx.ravel()]
    diag[:-1, :] += Tx
    diag[1:, :] += Tx

    ty = diffusion * dx[:, None] / (0.5 * dy[None, :-1] + 0.5 * dy[None, 1:])
    Ty = np.broadcast_to(ty, (nx, ny - 1))
    lo, hi = idx[:, :-1].ravel(), idx[:, 1:].ravel()
    rows += [lo, hi]
    cols += [hi, lo]
    vals += [-Ty.ravel(), -Ty.ravel()]
    diag[:, :-1] += Ty
    diag[:, 1:] += Ty

    # Robin walls via mirrored ghost elimination: outward flux through a
    # boundary face of width L and cell depth h is  2 b L / (4 b + h) * u_c
    b = diffusion
    diag[0, :] += 2 * b * dy / (4 * b + dx[0])
    diag[-1, :] += 2 * b * dy / (4 * b + dx[-1])
    diag[:, 0] += 2 * b * dx / (4 * b + dy[0])
    diag[:, -1] += 2 * b * dx / (4 * b + dy[-1])

    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())
    A = sp.csc_matrix((np.concatenate(vals).astype(complex),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(nx * ny, nx * ny))
    zdiag = (absorption.ravel() + 1j * wavenumber) * grid.cell_areas.ravel()
    return A + sp.diags(zdiag).tocsc()


def dot_solve(grid: Grid2D, absorption: np.ndarray, diffusion: float,
              sources, omega: float, speed: float = C0_CM_PER_S / REFRACTIVE_INDEX
              ) -> np.ndarray:
    """Complex flux field for point sources ``(x, y, amplitude)``."""
    from .ert import source_vector
    A = assemble_dot_operator(grid, absorption, diffusion, omega / speed)
    b = source_vector(grid, sources).astype(complex)
    u = spla.splu(A).solve(b)
    if not np.all(np.isfinite(u)):
        raise SolverFailure("DOT solve produced non-finite flux")
    return u.reshape(grid.shape)


@dataclass(eq=False)
class DotSetup:
    """Imaging square with sources on the top wall and detectors on the
    bottom wall, probed at several modulation frequencies."""

    grid: Grid2D
    source_cells: np.ndarray       # (n_src, 2)
    detector_cells: np.ndarray     # (n_det, 2)
    frequencies: np.ndarray        # Hz
    mu_s_prime: float = 6.0        # 1/cm
    speed: float = C0_CM_PER_S / REFRACTIVE_INDEX

    def __post_init__(self):
        self.frequencies = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        if np.any(self.frequencies < 0):
            raise ValueError("frequencies must be nonnegative")
        if self.mu_s_prime <= 0:
            raise ValueError("reduced scattering must be positive")
        self.source_flat = self.source_cells[:, 0] * self.grid.ny + self.source_cells[:, 1]
        self.detector_flat = self.detector_cells[:, 0] * self.grid.ny + self.detector_cells[:, 1]

    @property
    def diffusion(self) -> float:
        return 1.0 / (3.0 * self.mu_s_prime)

    @property
    def n_sources(self) -> int:
        return self.source_cells.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.detector_cells.shape[0]

    @property
    def data_size(self) -> int:
        return self.frequencies.size * self.n_sources * self.n_detectors


def make_dot_setup(n: int = 50, side_cm: float = 5.0, n_sources: int = 8,
                   n_detectors: int = 8, frequencies=DEFAULT_FREQUENCIES_HZ,
                   mu_s_prime: float = 6.0) -> DotSetup:
    """Standard setup: ``n`` x ``n`` grid over a ``side_cm`` square, sources
    snapped to top-row cell centers and detectors to bottom-row centers at
    equal lateral pitch."""
    grid = Grid2D.uniform((0.0, side_cm), (0.0, side_cm), n, n)
    xs = (np.arange(n_sources) + 0.5) * side_cm / n_sources
    xd = (np.arange(n_detectors) + 0.5) * side_cm / n_detectors
    src = np.array([[int(np.argmin(np.abs(grid.x_centers - x))), n - 1] for x in xs])
    det = np.array([[int(np.argmin(np.abs(grid.x_centers - x))), 0] for x in xd])
    return DotSetup(grid=grid, source_cells=src, detector_cells=det,
                    frequencies=np.asarray(frequencies, dtype=float),
                    mu_s_prime=mu_s_prime)


class DotModel(ForwardModel):
    """Forward model with absorption as the unknown property image."""

    def __init__(self, setup: DotSetup):
        self.setup = setup
        self.grid = setup.grid

    @property
    def data_size(self) -> int:
        return self.setup.data_size

    def _fields(self, p: np.ndarray):
        p = self._check_grid(p)
        key = p.tobytes()
        if getattr(self, "_cache_key", None) != key:
            st = self.setup
            us, ud = [], []
            for f in st.frequencies:
                A = assemble_dot_operator(st.grid, p, st.diffusion,
                                          2 * np.pi * f / st.speed)
                lu = spla.splu(A)
                rhs = np.zeros((st.grid.n_cells, st.n_sources + st.n_detectors),
                               dtype=complex)
                rhs[st.source_flat, np.arange(st.n_sources)] = 1.0
                rhs[st.detector_flat, st.n_sources + np.arange(st.n_detectors)] = 1.0
                U = lu.solve(rhs)
                if not np.all(np.isfinite(U)):
                    raise SolverFailure("DOT solve produced non-finite flux")
                us.append(U[:, :st.n_sources])
                ud.append(U[:, st.n_sources:])
            self._cache_key = key
            self._cache = (us, ud)
        return self._cache

    def forward(self, p: np.ndarray) -> np.ndarray:
        us, _ = self._fields(p)
        st = self.setup
        out = np.empty(st.data_size, dtype=complex)
        pos = 0
        for fi in range(st.frequencies.size):
            for si in range(st.n_sources):
                out[pos:pos + st.n_detectors] = us[fi][st.detector_flat, si]
                pos += st.n_detectors
        return out

    def sensitivity(self, p: np.ndarray) -> np.ndarray:
        us, ud = self._fields(p)
        st = self.setup
        areas = self.grid.cell_areas.ravel()
        S = np.empty((st.data_size, self.grid.n_cells), dtype=complex)
        pos = 0
        for fi in range(st.frequencies.size):
            for si in range(st.n_sources):
                block = -(us[fi][:, si][None, :] * ud[fi].T) * areas[None, :]
                S[pos:pos + st.n_detectors, :] = block
                pos += st.n_detectors
        return S

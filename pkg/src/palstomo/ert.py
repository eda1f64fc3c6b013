"""2D DC electrical resistance tomography.

The potential u solves the conductivity equation

    div( sigma grad u ) = s      in the modelling box,

with zero-flux (Neumann) condition on the top surface and homogeneous
Dirichlet condition on the sides and bottom, discretized with a
cell-centered 5-point finite-volume stencil.  Face conductivities use the
harmonic mean, which preserves flux continuity across the piecewise-constant
shape boundary; the assembled operator is symmetric positive definite.

Experiments drive current dipoles between pairs of boundary sensors of the
imaging window and record the potential at the remaining sensors.  The
measurement sensitivities are the exact derivatives of the discrete model:
for measurement (source field u_s, adjoint/monopole field u_d),

    d m / d sigma_c = sum_{faces at c}  dT_f/dsigma_c * (du_s)_f * (du_d)_f,

the discrete counterpart of the adjoint identity
``dm[dsigma] = int dsigma grad(u_s) . grad(u_d) dx``.  Only cells of the
imaging window are inversion unknowns; everything outside is frozen at the
background conductivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .forward import ForwardModel, SolverFailure
from .grids import Grid2D, graded_axis


def _face_data(grid: Grid2D, sigma: np.ndarray):
    """Harmonic-mean transmissibilities of interior faces and their
    derivatives with respect to the two adjacent cell conductivities."""
    dx, dy = grid.dx, grid.dy
    # x faces between (i, j) and (i+1, j)
    ax = 0.5 * dx[:-1, None] / sigma[:-1, :]
    bx = 0.5 * dx[1:, None] / sigma[1:, :]
    Tx = dy[None, :] / (ax + bx)
    dTx_lo = Tx * Tx * (0.5 * dx[:-1, None]) / (dy[None, :] * sigma[:-1, :] ** 2)
    dTx_hi = Tx * Tx * (0.5 * dx[1:, None]) / (dy[None, :] * sigma[1:, :] ** 2)
    # y faces between (i, j) and (i, j+1)
    ay = 0.5 * dy[None, :-1] / sigma[:, :-1]
    by = 0.5 * dy[None, 1:] / sigma[:, 1:]
    Ty = dx[:, None] / (ay + by)
    dTy_lo = Ty * Ty * (0.5 * dy[None, :-1]) / (dx[:, None] * sigma[:, :-1] ** 2)
    dTy_hi = Ty * Ty * (0.5 * dy[None, 1:]) / (dx[:, None] * sigma[:, 1:] ** 2)
    return Tx, Ty, (dTx_lo, dTx_hi, dTy_lo, dTy_hi)


def assemble_operator(grid: Grid2D, sigma: np.ndarray):
    """SPD matrix for ``-div(sigma grad .)`` with Neumann top and Dirichlet
    sides/bottom, plus the interior face transmissibilities."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != grid.shape:
        raise ValueError("conductivity shape does not match the grid")
    if np.any(sigma <= 0):
        raise ValueError("conductivity must be positive everywhere")
    nx, ny = grid.shape
    dx, dy = grid.dx, grid.dy
    Tx, Ty, dT = _face_data(grid, sigma)

    idx = np.arange(nx * ny).reshape(nx, ny)
    diag = np.zeros((nx, ny))
    rows, cols, vals = [], [], []

    lo, hi = idx[:-1, :].ravel(), idx[1:, :].ravel()
    rows += [lo, hi]
    cols += [hi, lo]
    vals += [-Tx.ravel(), -Tx.ravel()]
    diag[:-1, :] += Tx
    diag[1:, :] += Tx

    lo, hi = idx[:, :-1].ravel(), idx[:, 1:].ravel()
    rows += [lo, hi]
    cols += [hi, lo]
    vals += [-Ty.ravel(), -Ty.ravel()]
    diag[:, :-1] += Ty
    diag[:, 1:] += Ty

    # Dirichlet walls: ghost value eliminated with u = 0 on the outer face
    diag[0, :] += dy * sigma[0, :] / (0.5 * dx[0])
    diag[-1, :] += dy * sigma[-1, :] / (0.5 * dx[-1])
    diag[:, 0] += dx * sigma[:, 0] / (0.5 * dy[0])
    # top boundary (j = ny-1) is the zero-flux surface: no term

    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())
    A = sp.csc_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(nx * ny, nx * ny))
    return A, Tx, Ty, dT


def source_vector(grid: Grid2D, sources) -> np.ndarray:
    """Integrated source vector for point sources ``(x, y, amplitude)``.

    Each point charge is spread bilinearly over the (up to four) surrounding
    cell centers; a point sitting exactly on a cell center loads only that
    cell.  Amplitudes are the integrated source strengths, i.e. a delta of
    weight ``amp`` (a density ``amp / cell_area`` over one cell).
    """
    b = np.zeros(grid.n_cells)
    for (x, y, amp) in sources:
        for i, wi in _axis_weights(grid.x_centers, x):
            for j, wj in _axis_weights(grid.y_centers, y):
                b[i * grid.ny + j] += amp * wi * wj
    return b


def _axis_weights(centers: np.ndarray, x: float):
    if x <= centers[0]:
        return [(0, 1.0)]
    if x >= centers[-1]:
        return [(centers.size - 1, 1.0)]
    i = int(np.searchsorted(centers, x, side="right")) - 1
    t = (x - centers[i]) / (centers[i + 1] - centers[i])
    return [(i, 1.0 - t), (i + 1, t)]


def ert_solve(grid: Grid2D, sigma: np.ndarray, sources) -> np.ndarray:
    """Potential field for ``div(sigma grad u) = s`` under the standard
    boundary conditions (top zero-flux, elsewhere grounded)."""
    A, *_ = assemble_operator(grid, sigma)
    b = source_vector(grid, sources)
    u = _factorize(A).solve(-b)
    return u.reshape(grid.shape)


def _factorize(A):
    try:
        lu = spla.splu(A)
    except RuntimeError as e:  # pragma: no cover - singular operator
        raise SolverFailure(f"sparse factorization failed: {e}") from e
    return lu


@dataclass(eq=False)
class ErtSetup:
    """Geometry of the survey: full graded grid, uniform imaging window,
    sensor cells and the dipole schedule."""

    grid: Grid2D
    inner_ix: slice
    inner_iy: slice
    sensor_cells: np.ndarray      # (n_sensors, 2) full-grid (i, j)
    dipoles: np.ndarray           # (n_experiments, 2) sensor list indices
    background: float

    def __post_init__(self):
        flat = self.sensor_cells[:, 0] * self.grid.ny + self.sensor_cells[:, 1]
        if np.unique(flat).size != flat.size:
            raise ValueError("sensors must occupy distinct cells")
        if np.any(self.dipoles[:, 0] == self.dipoles[:, 1]):
            raise ValueError("each dipole needs two distinct sensors")
        self.sensor_flat = flat
        self.inner = self.grid.subgrid(self.inner_ix, self.inner_iy)
        self.measure_idx = [
            np.array([k for k in range(self.n_sensors) if k not in pair])
            for pair in self.dipoles]

    @property
    def n_sensors(self) -> int:
        return self.sensor_cells.shape[0]

    @property
    def n_experiments(self) -> int:
        return self.dipoles.shape[0]

    @property
    def data_size(self) -> int:
        return sum(m.size for m in self.measure_idx)


def make_ert_setup(n_inner: int = 75, n_pad: int = 25,
                   n_side_sensors: int = 10, n_top_sensors: int = 10,
                   background: float = 0.01) -> ErtSetup:
    """Survey over the box [-3,3]x[-3,0] m with imaging window
    [-0.5,0.5]x[-1,0] m.

    The window is gridded uniformly ``n_inner`` x ``n_inner`` and the
    exterior coarsens linearly (default 125 x 100 cells overall).  Sensors
    sit in the first layer of window cells: ``n_side_sensors`` per side wall
    plus ``n_top_sensors`` on the top surface, listed along the path
    left-bottom -> left-top -> across the top -> right-top -> right-bottom.

    The dipole schedule is a deterministic cross-medium pairing (the same
    number of experiments as sensors plus the three diagonal families):
    left-right at equal depth, top-left, top-right, and left-right across
    opposite depths.  Every pair drives current across the window.
    """
    x_edges = graded_axis(-0.5, 0.5, n_inner, pad_lo=2.5, n_pad_lo=n_pad,
                          pad_hi=2.5, n_pad_hi=n_pad)
    y_edges = graded_axis(-1.0, 0.0, n_inner, pad_lo=2.0, n_pad_lo=n_pad)
    grid = Grid2D(x_edges, y_edges)
    ix = slice(n_pad, n_pad + n_inner)
    iy = slice(n_pad, n_pad + n_inner)

    def snap_y(y):
        return n_pad + int(np.argmin(np.abs(grid.y_centers[iy] - y)))

    def snap_x(x):
        return n_pad + int(np.argmin(np.abs(grid.x_centers[ix] - x)))

    i_left = n_pad                      # first window column
    i_right = n_pad + n_inner - 1       # last window column
    j_top = grid.ny - 1                 # top surface row

    sensors = []
    side_y = -1.0 + (np.arange(n_side_sensors) + 0.5) / n_side_sensors
    top_x = -0.5 + (np.arange(n_top_sensors) + 0.5) / n_top_sensors
    for y in side_y:                                  # left wall, bottom -> top
        sensors.append((i_left, snap_y(y)))
    for x in top_x:                                   # top surface, left -> right
        sensors.append((snap_x(x), j_top))
    for y in side_y[::-1]:                            # right wall, top -> bottom
        sensors.append((i_right, snap_y(y)))
    sensors = np.asarray(sensors, dtype=int)

    ns, nt = n_side_sensors, n_top_sensors
    pairs = []
    pairs += [(j, 2 * ns + nt - 1 - j) for j in range(ns)]        # horizontal
    pairs += [(ns + k, k) for k in range(min(nt, ns))]            # top to left
    pairs += [(ns + k, ns + nt + k) for k in range(min(nt, ns))]  # top to right
    pairs += [(j, ns + nt + j) for j in range(ns)]                # crossed depths
    return ErtSetup(grid=grid, inner_ix=ix, inner_iy=iy,
                    sensor_cells=sensors, dipoles=np.asarray(pairs, dtype=int),
                    background=background)


class ErtModel(ForwardModel):
    """Forward model over the imaging window of an :class:`ErtSetup`.

    The property image handed to :meth:`forward` / :meth:`sensitivity` is the
    conductivity on the uniform window grid; it is embedded into the full
    graded grid at the background value before solving.  One factorization
    and one monopole field per sensor are shared by the data and all
    sensitivity rows of the same conductivity image.
    """

    def __init__(self, setup: ErtSetup):
        self.setup = setup
        self.grid = setup.inner
        self._cache_key = None
        self._cache = None

    @property
    def data_size(self) -> int:
        return self.setup.data_size

    def embed(self, p: np.ndarray) -> np.ndarray:
        sigma = np.full(self.setup.grid.shape, self.setup.background)
        sigma[self.setup.inner_ix, self.setup.inner_iy] = p
        return sigma

    def _fields(self, p: np.ndarray):
        p = self._check_grid(p)
        key = p.tobytes()
        if key != self._cache_key:
            st = self.setup
            sigma = self.embed(p)
            A, Tx, Ty, dT = assemble_operator(st.grid, sigma)
            rhs = np.zeros((st.grid.n_cells, st.n_sensors))
            rhs[st.sensor_flat, np.arange(st.n_sensors)] = 1.0
            V = _factorize(A).solve(rhs)
            if not np.all(np.isfinite(V)):
                raise SolverFailure("ERT solve produced non-finite potentials")
            self._cache_key = key
            self._cache = (V, dT)
        return self._cache

    def forward(self, p: np.ndarray) -> np.ndarray:
        V, _ = self._fields(p)
        st = self.setup
        out = np.empty(st.data_size)
        pos = 0
        for (a, b), meas in zip(st.dipoles, st.measure_idx):
            u_dip = -(V[st.sensor_flat[meas], a] - V[st.sensor_flat[meas], b])
            out[pos:pos + meas.size] = u_dip
            pos += meas.size
        return out

    def sensitivity(self, p: np.ndarray) -> np.ndarray:
        V, (dTx_lo, dTx_hi, dTy_lo, dTy_hi) = self._fields(p)
        st = self.setup
        nx, ny = st.grid.shape
        Vg = V.reshape(nx, ny, st.n_sensors)
        DX = Vg[1:, :, :] - Vg[:-1, :, :]
        DY = Vg[:, 1:, :] - Vg[:, :-1, :]
        S = np.empty((st.data_size, self.grid.n_cells))
        pos = 0
        for (a, b), meas in zip(st.dipoles, st.measure_idx):
            diffX = DX[:, :, a] - DX[:, :, b]
            diffY = DY[:, :, a] - DY[:, :, b]
            prodX = diffX[:, :, None] * DX[:, :, meas]
            prodY = diffY[:, :, None] * DY[:, :, meas]
            rows = np.zeros((nx, ny, meas.size))
            rows[:-1, :, :] += dTx_lo[:, :, None] * prodX
            rows[1:, :, :] += dTx_hi[:, :, None] * prodX
            rows[:, :-1, :] += dTy_lo[:, :, None] * prodY
            rows[:, 1:, :] += dTy_hi[:, :, None] * prodY
            block = rows[st.inner_ix, st.inner_iy, :]
            S[pos:pos + meas.size, :] = block.reshape(-1, meas.size).T
            pos += meas.size
        return S

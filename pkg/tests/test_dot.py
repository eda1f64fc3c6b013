import numpy as np
import pytest
import scipy.sparse.linalg as spla

from palstomo.dot import (DotModel, assemble_dot_operator, dot_solve,
                          make_dot_setup)
from palstomo.forward import adjoint_identity_error, directional_derivative_error
from palstomo.grids import Grid2D

from conftest import self_convergence_order


@pytest.fixture(scope="module")
def small_model():
    return DotModel(make_dot_setup(n=16, side_cm=5.0, n_sources=4, n_detectors=4))


def blob_absorption(grid, inside=0.015, outside=0.005):
    X, Y = grid.center_mesh
    side = grid.xlim[1]
    blob = (X - 0.4 * side) ** 2 + (Y - 0.55 * side) ** 2 < (0.15 * side) ** 2
    return np.where(blob, inside, outside)


def test_dc_field_is_real(small_model):
    p = blob_absorption(small_model.grid)
    data = small_model.forward(p)
    n_dc = small_model.setup.n_sources * small_model.setup.n_detectors
    dc = data[:n_dc]
    assert np.abs(dc.imag).max() < 1e-12 * np.abs(dc.real).max()
    assert np.all(dc.real > 0)


def test_modulation_damps_magnitude():
    grid = Grid2D.uniform((0, 5), (0, 5), 24, 24)
    alpha = np.full(grid.shape, 0.005)
    beta = 1.0 / 18.0
    src = [(2.55, 4.95, 1.0)]
    u0 = dot_solve(grid, alpha, beta, src, omega=0.0)
    u50 = dot_solve(grid, alpha, beta, src, omega=2 * np.pi * 50e6)
    assert np.all(np.abs(u50) <= np.abs(u0) * (1 + 1e-12))
    assert np.abs(u50).max() < np.abs(u0).max()


def test_operator_complex_symmetric(rng):
    grid = Grid2D.uniform((0, 5), (0, 5), 12, 12)
    alpha = 0.004 + 0.01 * rng.random(grid.shape)
    A = assemble_dot_operator(grid, alpha, 1 / 18.0, 0.01)
    assert abs((A - A.T)).max() == 0.0
    assert np.abs(A.diagonal().imag).max() > 0


def test_dc_block_matches_real_arithmetic_solve(small_model):
    # independent real-valued route for the zero-frequency block
    st = small_model.setup
    p = blob_absorption(small_model.grid)
    data = small_model.forward(p)
    A = assemble_dot_operator(st.grid, p, st.diffusion, 0.0).real.tocsc().copy()
    lu = spla.splu(A)
    for si in range(st.n_sources):
        b = np.zeros(st.grid.n_cells)
        b[st.source_flat[si]] = 1.0
        u = lu.solve(b)
        block = data[si * st.n_detectors:(si + 1) * st.n_detectors]
        assert np.allclose(block.real, u[st.detector_flat], rtol=1e-10)


def test_reciprocity():
    # swapping source and detector leaves the complex reading unchanged
    grid = Grid2D.uniform((0, 5), (0, 5), 30, 30)
    alpha = blob_absorption(grid)
    beta = 1.0 / 18.0
    omega = 2 * np.pi * 25e6
    xa, ya = grid.x_centers[5], grid.y_centers[29]
    xb, yb = grid.x_centers[22], grid.y_centers[0]
    u_ab = dot_solve(grid, alpha, beta, [(xa, ya, 1.0)], omega)[22, 0]
    u_ba = dot_solve(grid, alpha, beta, [(xb, yb, 1.0)], omega)[5, 29]
    assert abs(u_ab - u_ba) / abs(u_ab) < 1e-10


def test_directional_derivative(small_model, rng):
    p = blob_absorption(small_model.grid)
    dp = 5e-4 * rng.standard_normal(p.shape)
    assert directional_derivative_error(small_model, p, dp) < 1e-3


def test_adjoint_identity_conjugating_product(small_model, rng):
    S = small_model.sensitivity(blob_absorption(small_model.grid))
    assert adjoint_identity_error(S, rng) < 1e-10


def test_more_absorption_less_signal(small_model):
    # sanity for the sensitivity sign: raising absorption lowers |u|
    p = blob_absorption(small_model.grid)
    d1 = small_model.forward(p)
    d2 = small_model.forward(p + 0.002)
    assert np.all(np.abs(d2) < np.abs(d1))


def test_self_convergence_second_order():
    poles = [(2.47, 2.47, 1.0)]
    beta = 1.0 / 18.0

    def solve(n):
        grid = Grid2D.uniform((0, 5), (0, 5), n, n)
        alpha = np.full(grid.shape, 0.008)
        u = dot_solve(grid, alpha, beta, poles, omega=2 * np.pi * 25e6)
        return grid, np.abs(u)

    def window(X, Y):
        return np.hypot(X - 2.47, Y - 2.47) > 0.8

    order = self_convergence_order(solve, (20, 40, 80), window)
    assert order == pytest.approx(2.0, abs=0.3)


def test_setup_defaults():
    st = make_dot_setup()
    assert st.grid.shape == (50, 50)
    assert st.n_sources == 8 and st.n_detectors == 8
    assert st.data_size == 3 * 8 * 8
    assert st.mu_s_prime == 6.0
    assert st.diffusion == pytest.approx(1.0 / 18.0)
    assert np.allclose(st.frequencies, [0.0, 25e6, 50e6])
    # sources on the top row, detectors on the bottom row
    assert np.all(st.source_cells[:, 1] == 49)
    assert np.all(st.detector_cells[:, 1] == 0)


def test_validation():
    with pytest.raises(ValueError):
        make_dot_setup(frequencies=[-1.0])
    grid = Grid2D.uniform((0, 5), (0, 5), 8, 8)
    with pytest.raises(ValueError):
        assemble_dot_operator(grid, np.zeros(grid.shape), 1 / 18.0, 0.0)

"""Shared numeric helpers for the test suite."""

import numpy as np
import pytest

from palstomo import pals
from palstomo.grids import Grid2D, interpolate_to


def central_diff_cost(cost_fn, mu, k, h=1e-6):
    """Central finite difference of a scalar function in coordinate k,
    with the step scaled by the coordinate magnitude."""
    step = h * max(1.0, abs(mu[k]))
    up, dn = mu.copy(), mu.copy()
    up[k] += step
    dn[k] -= step
    return (cost_fn(up) - cost_fn(dn)) / (2.0 * step)


def property_fd_column(model, grid, params, k, h=1e-6):
    """Central finite difference of the property image in parameter k."""
    mu = pals.pack_params(model, params)
    step = h * max(1.0, abs(mu[k]))
    up, dn = mu.copy(), mu.copy()
    up[k] += step
    dn[k] -= step
    pp = pals.property_map(pals.apply_params(model, params, up), grid)
    pm = pals.property_map(pals.apply_params(model, params, dn), grid)
    return (pp - pm).ravel() / (2.0 * step)


def self_convergence_order(solve_on_grid, levels, window_fn):
    """Observed convergence order from three grid refinements.

    ``solve_on_grid(n)`` returns ``(Grid2D, field)``; fields from finer
    levels are bilinearly interpolated onto the coarsest centers and the
    order is estimated from the two successive difference norms over the
    cells selected by ``window_fn(X, Y)`` (a mask on coarse centers, used to
    stay away from source singularities).
    """
    grids_fields = [solve_on_grid(n) for n in levels]
    g0 = grids_fields[0][0]
    X, Y = g0.center_mesh
    w = window_fn(X, Y)
    vals = [grids_fields[0][1]]
    for g, f in grids_fields[1:]:
        vals.append(interpolate_to(g, f, g0))
    e1 = np.linalg.norm((vals[0] - vals[1])[w])
    e2 = np.linalg.norm((vals[1] - vals[2])[w])
    return np.log2(e1 / e2)


@pytest.fixture
def rng():
    return np.random.default_rng(20110401)

"""Parametric level set (PaLS) representation of a shape.

The level set field is a small sum of adaptive compactly supported bumps,

    phi(x) = sum_j  w_j * psi( |b_j (x - c_j)|_s ),

where ``w_j`` are weights, ``b_j`` dilations (inverse length scales),
``c_j`` centers, and ``|v|_s = sqrt(|v|^2 + s^2)`` is a smoothed Euclidean
norm that keeps phi differentiable in the dilations and centers.  The shape
is the superlevel set ``phi >= level`` and maps to a piecewise-constant
property image through a regularized Heaviside:

    p(x) = p_in * H(phi - level) + p_out * (1 - H(phi - level)).

Two Heaviside regularizations are provided: the global arctan ramp ``H1``
and the compactly supported C^2 ramp ``H2`` that saturates bit-exactly at
0/1 outside ``|t| <= eps``.  Under ``H2`` the derivative delta has compact
support, so bumps whose support misses the transition band
``|phi - level| < eps`` contribute exactly-zero sensitivity columns and can
be frozen for an iteration (narrow banding).

All parameter sensitivities are hand-differentiated closed forms:

    d phi / d w_j = psi(r_j)
    d phi / d b_j = w_j b_j |x - c_j|^2 / r_j * psi'(r_j)
    d phi / d c_j^(k) = w_j b_j^2 (c_j^(k) - x^(k)) / r_j * psi'(r_j)

with ``r_j = |b_j (x - c_j)|_s``, and each vanishes identically outside the
support disk of bump j.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .csrbf import WendlandKernel
from .grids import Grid2D

HEAVISIDE_KINDS = ("H1", "H2")

# parameter kinds for flat indexing of the unknown vector
WEIGHT = "weight"
DILATION = "dilation"
CENTER = "center"
CONTRAST_IN = "contrast_in"
CONTRAST_OUT = "contrast_out"
_BUMP_KINDS = (WEIGHT, DILATION, CENTER)


@dataclass(frozen=True)
class ParamIndex:
    """Address of one scalar unknown in the PaLS parameter vector.

    ``bump`` is a 0-based bump index (ignored for contrast kinds);
    ``axis`` selects the x/y component for center kinds.
    """

    kind: str
    bump: int = -1
    axis: int = 0

    def __post_init__(self):
        if self.kind not in _BUMP_KINDS + (CONTRAST_IN, CONTRAST_OUT):
            raise ValueError(f"unknown parameter kind {self.kind!r}")
        if self.kind == CENTER and self.axis not in (0, 1):
            raise ValueError("center axis must be 0 or 1")

    @property
    def is_bump_bound(self) -> bool:
        return self.kind in _BUMP_KINDS


@dataclass
class PalsModel:
    """Full PaLS parameter state.

    ``weights``, ``dilations`` have shape ``(m0,)`` and ``centers`` shape
    ``(m0, 2)``.  ``level`` is the c-level defining the shape boundary,
    ``epsilon`` the Heaviside transition half-width and ``norm_smoothing``
    the norm smoothing length (must be nonzero).  ``beta_min > 0`` enforces
    a lower bound on ``|dilations|`` so no bump can flatten globally.
    """

    weights: np.ndarray
    dilations: np.ndarray
    centers: np.ndarray
    contrast_in: float
    contrast_out: float
    level: float
    epsilon: float
    norm_smoothing: float
    kernel: WendlandKernel = field(default_factory=WendlandKernel)
    heaviside: str = "H2"
    beta_min: float = 0.0

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.dilations = np.atleast_1d(np.asarray(self.dilations, dtype=float))
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        m0 = self.weights.size
        if m0 < 1:
            raise ValueError("need at least one bump")
        if self.dilations.size != m0 or self.centers.shape[0] != m0:
            raise ValueError("weights, dilations and centers disagree on bump count")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.norm_smoothing <= 0:
            raise ValueError("norm_smoothing must be a small positive length")
        if self.heaviside not in HEAVISIDE_KINDS:
            raise ValueError(f"heaviside must be one of {HEAVISIDE_KINDS}")
        if self.heaviside == "H2" and abs(self.level) < self.epsilon:
            raise ValueError("H2 requires |level| >= epsilon")
        if np.any(self.dilations == 0.0):
            raise ValueError("dilations must be nonzero")
        if self.beta_min > 0 and np.any(np.abs(self.dilations) < self.beta_min):
            raise ValueError("|dilations| must stay >= beta_min")

    @property
    def m0(self) -> int:
        return self.weights.size

    def replace(self, **kw) -> "PalsModel":
        return dataclasses.replace(self, **kw)


# ---------------------------------------------------------------------------
# level set field and sensitivities

def bump_radius(model: PalsModel, grid: Grid2D, j: int) -> np.ndarray:
    """Smoothed scaled radius ``r_j`` of bump j at every cell center."""
    X, Y = grid.center_mesh
    d2 = (X - model.centers[j, 0]) ** 2 + (Y - model.centers[j, 1]) ** 2
    return np.sqrt(model.dilations[j] ** 2 * d2 + model.norm_smoothing ** 2)


def eval_phi(model: PalsModel, grid: Grid2D) -> np.ndarray:
    """PaLS field phi at every cell center."""
    phi = np.zeros(grid.shape)
    for j in range(model.m0):
        phi += model.weights[j] * model.kernel(bump_radius(model, grid, j))
    return phi


def eval_phi_sensitivity(model: PalsModel, grid: Grid2D, idx: ParamIndex) -> np.ndarray:
    """Analytic ``d phi / d mu`` for a bump-bound parameter, per cell.

    The returned field is identically zero outside the support disk of the
    addressed bump.  Contrast kinds are rejected (they do not enter phi).
    """
    if not idx.is_bump_bound:
        raise ValueError("contrast parameters do not enter phi")
    j = idx.bump
    if not 0 <= j < model.m0:
        raise ValueError("bump index out of range")
    r = bump_radius(model, grid, j)
    if idx.kind == WEIGHT:
        return model.kernel(r)
    X, Y = grid.center_mesh
    dpsi = model.kernel.derivative(r)
    b = model.dilations[j]
    if idx.kind == DILATION:
        d2 = (X - model.centers[j, 0]) ** 2 + (Y - model.centers[j, 1]) ** 2
        return model.weights[j] * b * d2 / r * dpsi
    comp = (X, Y)[idx.axis]
    return model.weights[j] * b * b * (model.centers[j, idx.axis] - comp) / r * dpsi


# ---------------------------------------------------------------------------
# regularized Heaviside / delta

def heaviside(model: PalsModel, t):
    return heaviside_value(model.heaviside, model.epsilon, t)


def delta(model: PalsModel, t):
    return delta_value(model.heaviside, model.epsilon, t)


def heaviside_value(kind: str, eps: float, t):
    """Regularized Heaviside.  ``H1`` is the global arctan ramp; ``H2`` is
    the C^2 ramp that is bit-exactly 1 for ``t > eps`` and 0 for
    ``t < -eps``."""
    t = np.asarray(t, dtype=float)
    if kind == "H1":
        return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(np.pi * t / eps))
    mid = 0.5 + t / (2.0 * eps) + np.sin(np.pi * t / eps) / (2.0 * np.pi)
    return np.where(t > eps, 1.0, np.where(t < -eps, 0.0, mid))


def delta_value(kind: str, eps: float, t):
    """Exact derivative of :func:`heaviside_value` in ``t``."""
    t = np.asarray(t, dtype=float)
    if kind == "H1":
        return (1.0 / eps) / (1.0 + (np.pi * t / eps) ** 2)
    mid = (1.0 + np.cos(np.pi * t / eps)) / (2.0 * eps)
    return np.where(np.abs(t) <= eps, mid, 0.0)


# ---------------------------------------------------------------------------
# property image and its parameter sensitivities

def property_map(model: PalsModel, grid: Grid2D, phi: np.ndarray | None = None) -> np.ndarray:
    """Piecewise-constant property image induced by the level set."""
    if phi is None:
        phi = eval_phi(model, grid)
    H = heaviside(model, phi - model.level)
    # gap form: bit-exact collapse for equal contrasts and on the H = 0 branch
    return model.contrast_out + (model.contrast_in - model.contrast_out) * H


def property_sensitivity(model: PalsModel, grid: Grid2D, idx: ParamIndex,
                         phi: np.ndarray | None = None) -> np.ndarray:
    """``d p / d mu`` per cell for any parameter kind, including contrasts."""
    if phi is None:
        phi = eval_phi(model, grid)
    if idx.kind == CONTRAST_IN:
        return heaviside(model, phi - model.level)
    if idx.kind == CONTRAST_OUT:
        return 1.0 - heaviside(model, phi - model.level)
    dphi = eval_phi_sensitivity(model, grid, idx)
    return (model.contrast_in - model.contrast_out) * delta(model, phi - model.level) * dphi


def property_sensitivity_matrix(model: PalsModel, grid: Grid2D,
                                params: list[ParamIndex],
                                phi: np.ndarray | None = None) -> np.ndarray:
    """Columns ``d p / d mu`` for a list of parameters, shape
    ``(n_cells, n_params)``.  Shares the phi/delta evaluation and the
    per-bump radius fields across columns."""
    if phi is None:
        phi = eval_phi(model, grid)
    X, Y = grid.center_mesh
    dlt = delta(model, phi - model.level)
    H = None
    contrast_gap = model.contrast_in - model.contrast_out
    cols = np.empty((grid.n_cells, len(params)))
    cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def bump_fields(j):
        if j not in cache:
            d2 = (X - model.centers[j, 0]) ** 2 + (Y - model.centers[j, 1]) ** 2
            r = np.sqrt(model.dilations[j] ** 2 * d2 + model.norm_smoothing ** 2)
            cache[j] = (d2, r, model.kernel.derivative(r))
        return cache[j]

    for k, idx in enumerate(params):
        if idx.kind == CONTRAST_IN or idx.kind == CONTRAST_OUT:
            if H is None:
                H = heaviside(model, phi - model.level)
            col = H if idx.kind == CONTRAST_IN else 1.0 - H
        else:
            d2, r, dpsi = bump_fields(idx.bump)
            b = model.dilations[idx.bump]
            if idx.kind == WEIGHT:
                dphi = model.kernel(r)
            elif idx.kind == DILATION:
                dphi = model.weights[idx.bump] * b * d2 / r * dpsi
            else:
                comp = (X, Y)[idx.axis]
                dphi = (model.weights[idx.bump] * b * b
                        * (model.centers[idx.bump, idx.axis] - comp) / r * dpsi)
            col = contrast_gap * dlt * dphi
        cols[:, k] = col.ravel()
    return cols


def active_bumps(model: PalsModel, grid: Grid2D,
                 phi: np.ndarray | None = None) -> np.ndarray:
    """Indices of bumps whose support meets the transition band
    ``|phi - level| < eps`` at cell-center resolution.

    Under ``H2`` the delta is compactly supported, so bumps outside the band
    have exactly-zero sensitivities and their parameters stay unchanged for
    the iteration.  Under ``H1`` the delta has global support and every bump
    is returned.
    """
    if model.heaviside == "H1":
        return np.arange(model.m0)
    if phi is None:
        phi = eval_phi(model, grid)
    band = np.abs(phi - model.level) < model.epsilon
    if not band.any():
        return np.empty(0, dtype=int)
    out = [j for j in range(model.m0)
           if np.any(band & (bump_radius(model, grid, j) < 1.0))]
    return np.asarray(out, dtype=int)


# ---------------------------------------------------------------------------
# flat parameter vector layout:
# [w_1..w_m, b_1..b_m, cx_1, cy_1, .., cx_m, cy_m, (p_in, p_out)]

def param_indices(m0: int, unknown_contrasts: bool) -> list[ParamIndex]:
    """Full flat ordering of the unknown vector."""
    out = [ParamIndex(WEIGHT, j) for j in range(m0)]
    out += [ParamIndex(DILATION, j) for j in range(m0)]
    for j in range(m0):
        out += [ParamIndex(CENTER, j, 0), ParamIndex(CENTER, j, 1)]
    if unknown_contrasts:
        out += [ParamIndex(CONTRAST_IN), ParamIndex(CONTRAST_OUT)]
    return out


def get_param(model: PalsModel, idx: ParamIndex) -> float:
    if idx.kind == WEIGHT:
        return float(model.weights[idx.bump])
    if idx.kind == DILATION:
        return float(model.dilations[idx.bump])
    if idx.kind == CENTER:
        return float(model.centers[idx.bump, idx.axis])
    if idx.kind == CONTRAST_IN:
        return float(model.contrast_in)
    return float(model.contrast_out)


def pack_params(model: PalsModel, params: list[ParamIndex]) -> np.ndarray:
    return np.array([get_param(model, idx) for idx in params])


def apply_params(model: PalsModel, params: list[ParamIndex], mu: np.ndarray) -> PalsModel:
    """New model with the addressed parameters set to ``mu``.

    Dilations are clamped to ``|b| >= beta_min`` (sign preserving) when the
    model carries a positive ``beta_min``; parameters not addressed keep
    their bit pattern.
    """
    w = model.weights.copy()
    b = model.dilations.copy()
    c = model.centers.copy()
    p_in, p_out = model.contrast_in, model.contrast_out
    for idx, v in zip(params, mu):
        if idx.kind == WEIGHT:
            w[idx.bump] = v
        elif idx.kind == DILATION:
            b[idx.bump] = v
        elif idx.kind == CENTER:
            c[idx.bump, idx.axis] = v
        elif idx.kind == CONTRAST_IN:
            p_in = float(v)
        else:
            p_out = float(v)
    if model.beta_min > 0:
        small = np.abs(b) < model.beta_min
        if small.any():
            sign = np.where(b[small] == 0.0, np.sign(model.dilations[small]), np.sign(b[small]))
            sign = np.where(sign == 0.0, 1.0, sign)
            b[small] = sign * model.beta_min
    return model.replace(weights=w, dilations=b, centers=c,
                         contrast_in=p_in, contrast_out=p_out)

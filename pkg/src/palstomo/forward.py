"""Common contract for the tomographic forward models.

A forward model owns its source/detector geometry and an inversion grid.
Given a property image ``p`` on that grid it produces

* ``forward(p)``: the synthetic measurement vector (1D, real or complex,
  experiment-major blocks), and
* ``sensitivity(p)``: the matrix ``S`` with ``S[k, cell]`` the derivative of
  measurement k with respect to the property value of that cell, so that
  ``S @ dp`` is the first-order response to a pixel perturbation ``dp``.

``S`` is the exact Jacobian of the discrete model, which makes the
finite-difference and adjoint identities below hold to tight tolerances.
The parametric Jacobian used by the optimizer is always assembled
downstream as ``S @ P`` with ``P`` the property-image sensitivities of the
shape parameters; the physics never sees shape parameters.
"""

from __future__ import annotations

import numpy as np


class SolverFailure(RuntimeError):
    """A forward/adjoint linear solve failed or produced non-finite values."""


class ForwardModel:
    """Base class; concrete models implement ``forward`` and ``sensitivity``."""

    grid = None  # inversion Grid2D

    def forward(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sensitivity(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def data_size(self) -> int:
        raise NotImplementedError

    def residual(self, p: np.ndarray, data: np.ndarray) -> np.ndarray:
        """Blockwise ``forward(p) - data``."""
        data = np.asarray(data)
        if data.shape != (self.data_size,):
            raise ValueError(f"data must have shape ({self.data_size},)")
        return self.forward(p) - data

    def forward_and_sensitivity(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Both outputs for one property image; models override to share
        factorizations between the two."""
        return self.forward(p), self.sensitivity(p)

    def _check_grid(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != self.grid.shape:
            raise ValueError(f"property image must have shape {self.grid.shape}")
        return p


def directional_derivative_error(model: ForwardModel, p: np.ndarray,
                                 dp: np.ndarray, h: float = 1e-6) -> float:
    """Relative mismatch between ``S @ dp`` and the forward finite
    difference ``(R(p + h dp) - R(p)) / h``."""
    S = model.sensitivity(p)
    lin = S @ dp.ravel()
    fd = (model.forward(p + h * dp) - model.forward(p)) / h
    return float(np.linalg.norm(fd - lin) / np.linalg.norm(lin))


def adjoint_identity_error(S, rng: np.random.Generator) -> float:
    """Relative error in ``<w, S v> = <S^H w, v>`` for random vectors, using
    the conjugating inner product."""
    n_rows, n_cols = S.shape
    v = rng.standard_normal(n_cols)
    w = rng.standard_normal(n_rows)
    if np.iscomplexobj(S @ v):
        w = w + 1j * rng.standard_normal(n_rows)
    lhs = np.vdot(w, S @ v)
    rhs = np.vdot(S.conj().T @ w, v)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)

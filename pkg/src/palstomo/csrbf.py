"""Wendland compactly supported radial basis functions of minimal degree.

The kernels are the classic truncated-power polynomials

====================  =====================================================  ==========
kernel                profile for ``0 <= r <= 1``                            smoothness
====================  =====================================================  ==========
``l = 1``             ``(1-r)^(L+1) ((L+1) r + 1)``                          C^2
``l = 2``             ``(1-r)^(L+2) ((L^2+4L+3) r^2 + (3L+6) r + 3)``        C^4
``l = 3``             ``(1-r)^(L+3) ((L^3+9L^2+23L+15) r^3``                 C^6
                      ``+ (6L^2+36L+45) r^2 + (15L+45) r + 15)``
====================  =====================================================  ==========

with ``L = floor(n/2) + l + 1`` for space dimension ``n``, and identically
zero for ``r > 1``.  Values and first derivatives are evaluated from
hand-differentiated closed forms so the compact support is *exact*: both
return literal ``0.0`` for ``r >= 1``, with no underflow residue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WendlandKernel:
    """Minimal-degree Wendland kernel ``psi_{n,l}``.

    Parameters
    ----------
    space_dim : int
        Ambient dimension ``n`` the kernel certifies positive definiteness
        for.  The default reproduces the ``psi_{1,1}`` profile
        ``(1-r)^3 (3r+1)``, which is also a valid C^2 bump in 2D.
    smoothness_index : int
        ``l`` in {1, 2, 3}; the kernel is ``C^{2l}``.
    """

    space_dim: int = 1
    smoothness_index: int = 1

    def __post_init__(self):
        if self.space_dim < 1:
            raise ValueError("space_dim must be a positive integer")
        if self.smoothness_index not in (1, 2, 3):
            raise ValueError("smoothness_index must be 1, 2 or 3")

    @property
    def ell(self) -> int:
        """Degree parameter ``L = floor(n/2) + l + 1``."""
        return self.space_dim // 2 + self.smoothness_index + 1

    def __call__(self, r):
        """Evaluate ``psi(r)`` for ``r >= 0`` (vectorized)."""
        r = np.asarray(r, dtype=float)
        L = self.ell
        base = np.maximum(1.0 - r, 0.0)
        l = self.smoothness_index
        if l == 1:
            return base ** (L + 1) * ((L + 1) * r + 1.0)
        if l == 2:
            return base ** (L + 2) * (
                (L * L + 4 * L + 3) * r * r + (3 * L + 6) * r + 3.0)
        return base ** (L + 3) * (
            (L**3 + 9 * L**2 + 23 * L + 15) * r**3
            + (6 * L**2 + 36 * L + 45) * r * r
            + (15 * L + 45) * r + 15.0)

    def derivative(self, r):
        """Evaluate ``d psi / d r`` (vectorized); zero for ``r >= 1`` and at
        ``r = 0``."""
        r = np.asarray(r, dtype=float)
        L = self.ell
        base = np.maximum(1.0 - r, 0.0)
        l = self.smoothness_index
        if l == 1:
            return -(L + 1) * (L + 2) * r * base ** L
        if l == 2:
            return -(L + 3) * (L + 4) * r * base ** (L + 1) * ((L + 1) * r + 1.0)
        return -(L + 5) * (L + 6) * r * base ** (L + 2) * (
            (L + 1) * (L + 3) * r * r + 3 * (L + 2) * r + 3.0)

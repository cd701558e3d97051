"""Shared trigonometric kernels, so every code path rounds identically."""
from __future__ import annotations

import numpy as np

# index a mod 4 -> (sign, use_sin): h_0=cos, h_1=-sin, h_2=-cos, h_3=sin
_PHASE_TABLE = ((1.0, False), (-1.0, True), (-1.0, False), (1.0, True))


def phase(a: int, t):
    """h_a(t) = cos(pi a / 2 + t) through its 4-periodic table."""
    sign, use_sin = _PHASE_TABLE[int(a) % 4]
    return sign * (np.sin(t) if use_sin else np.cos(t))


def project(points: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """points @ omegas.T, accumulated coordinate by coordinate.

    Avoids BLAS so results do not depend on the linear-algebra thread count.
    """
    out = points[:, 0:1] * omegas[None, :, 0]
    for i in range(1, points.shape[1]):
        out += points[:, i:i + 1] * omegas[None, :, i]
    return out

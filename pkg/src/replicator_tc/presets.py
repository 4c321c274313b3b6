"""Ready-made systems used by the CLI, the demos and the tests."""

from __future__ import annotations

import numpy as np

from .glv import GlvSystem
from .poly import PolynomialField, rotation_field

LORENZ_PARAMS = {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0}
LORENZ_SHIFT = 30.0
LORENZ_START = (1.0, 1.0, 1.0)


def lorenz_field(sigma=10.0, rho=28.0, beta=8.0 / 3.0) -> PolynomialField:
    return PolynomialField.from_dicts([
        {(0, 1, 0): sigma, (1, 0, 0): -sigma},
        {(1, 0, 0): rho, (1, 0, 1): -1.0, (0, 1, 0): -1.0},
        {(1, 1, 0): 1.0, (0, 0, 1): -beta},
    ])


def shifted_lorenz(shift: float = LORENZ_SHIFT, **params) -> PolynomialField:
    """Lorenz field in ``X = x + shift``, so the attractor sits inside the positive orthant."""
    p = {**LORENZ_PARAMS, **params}
    return lorenz_field(**p).shift(np.full(3, float(shift)))


def logistic_glv(rate: float = 1.0) -> GlvSystem:
    """``x' = x (rate - x)``."""
    return GlvSystem([rate], [[-1.0]], [[1.0]])


def rotation(n: int = 2) -> PolynomialField:
    return rotation_field(n)


PRESETS = ("lorenz", "logistic", "rotation")

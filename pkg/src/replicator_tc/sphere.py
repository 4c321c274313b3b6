"""Sphere-tangent polynomial fields moved into the positive orthant.

A field ``phi`` tangent to the unit sphere is extended to
``x' = x (1 - |x|^2) + phi(x)``, which makes the sphere attracting, then
translated by ``sigma * 1`` so that the faces of the positive orthant push
inward.  The resulting polynomial field goes through the GLV embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import RejectedInput
from .game import MatrixGame
from .glv import EmbeddingMap, GlvSystem, embed_glv, poly_to_glv, simulate_with_clock
from .integrate import Trajectory
from .poly import PolynomialField, eval_field, tangency_residual

SAFETY_FACTOR = 1.5
SIGMA_GRID = 1e-3
SIGMA_MARGIN = 0.1


def sphere_samples(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic sample of ``count`` points on the unit sphere in R^n."""
    if n == 2:
        theta = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    g = np.random.default_rng(seed).normal(size=(count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _radial_part(n: int) -> PolynomialField:
    """``x_i (1 - |x|^2)`` as a polynomial field."""
    comps = []
    for i in range(n):
        ei = tuple(1 if k == i else 0 for k in range(n))
        d = {ei: 1.0}
        for j in range(n):
            e = tuple(ei[k] + (2 if k == j else 0) for k in range(n))
            d[e] = d.get(e, 0.0) - 1.0
        comps.append(d)
    return PolynomialField.from_dicts(comps)


@dataclass(frozen=True)
class ExtendedField:
    base: PolynomialField
    poly: PolynomialField

    @property
    def n(self) -> int:
        return self.base.n

    def __call__(self, x):
        return eval_field(self.poly, x)


def extend_to_ambient(base: PolynomialField, samples: int = 200, tol: float = 1e-10) -> ExtendedField:
    """Add the radial logistic term; rejects fields that are not tangent to the sphere."""
    pts = sphere_samples(base.n, samples)
    res = np.array([abs(tangency_residual(base, p, tol=1e-12)) for p in pts])
    worst = int(np.argmax(res))
    if res[worst] > tol:
        raise RejectedInput(
            f"field is not tangent to the sphere: residual {res[worst]:.3e} at {pts[worst].tolist()}"
        )
    return ExtendedField(base, base + _radial_part(base.n))


def radial_residual(ext: ExtendedField, x) -> float:
    """``|d/dt |x|^2 - 2 |x|^2 (1 - |x|^2)|`` at ``x``."""
    x = np.asarray(x, dtype=float)
    r = float(x @ x)
    return abs(2.0 * float(x @ ext(x)) - 2.0 * r * (1.0 - r))


def logistic_radius(r0: float, t):
    """Closed-form solution of ``r' = 2 r (1 - r)``."""
    e = np.exp(2.0 * np.asarray(t, dtype=float))
    return r0 * e / (1.0 + r0 * (e - 1.0))


def boundary_slab_samples(n: int, sigma: float, samples: int, seed: int = 0) -> np.ndarray:
    """Points ``y >= 0`` with one coordinate zero and ``|y - sigma 1| <= 2 sigma sqrt(n)``."""
    rng = np.random.default_rng(seed)
    radius = 2.0 * sigma * math.sqrt(n)
    out = []
    while sum(len(o) for o in out) < samples:
        Y = rng.uniform(0.0, sigma + radius, size=(2 * samples, n))
        face = rng.integers(0, n, size=2 * samples)
        Y[np.arange(2 * samples), face] = 0.0
        ok = np.linalg.norm(Y - sigma, axis=1) <= radius
        out.append(Y[ok])
    return np.vstack(out)[:samples]


def estimate_bound_B(base: PolynomialField, sigma_candidate: float, samples: int = 4096, seed: int = 0) -> float:
    """Sampled sup of ``|phi_i(y - sigma 1)|`` over the boundary slabs, times 1.5."""
    if not sigma_candidate > 1:
        raise RejectedInput("sigma candidate must exceed 1")
    Y = boundary_slab_samples(base.n, sigma_candidate, samples, seed)
    vals = base.eval_many(Y - sigma_candidate)
    return SAFETY_FACTOR * float(np.abs(vals).max(initial=0.0))


def cubic_margin_exact(sigma: float, B: float) -> Fraction:
    """``sigma^3 - sigma - B`` evaluated in exact rational arithmetic on the float inputs."""
    s = Fraction(sigma)
    return s**3 - s - Fraction(B)


@dataclass(frozen=True)
class TranslationParams:
    sigma: float
    B_bound: float
    region: str = "boundary slabs {y >= 0, some y_i = 0, |y - sigma 1| <= 2 sigma sqrt(n)}"

    def __post_init__(self):
        if not self.sigma > 1:
            raise RejectedInput("sigma must exceed 1")
        if not cubic_margin_exact(self.sigma, self.B_bound) > 0:
            raise RejectedInput(f"B={self.B_bound:g} is not below sigma^3 - sigma = {self.sigma**3 - self.sigma:g}")

    @property
    def margin(self) -> float:
        """Guaranteed inward speed on the faces: ``sigma^3 - sigma - B``."""
        return self.sigma**3 - self.sigma - self.B_bound


def choose_sigma(B: float) -> TranslationParams:
    """Smallest ``sigma`` on a 1e-3 grid with ``sigma^3 - sigma > B``, plus 0.1."""
    if not (B >= 0 and math.isfinite(B)):
        raise RejectedInput("B must be finite and nonnegative")
    # the real root of s^3 - s - B above 1 seeds the grid search
    root = max(float(np.max(np.roots([1.0, 0.0, -1.0, -B]).real)), 1.0)
    k = max(1, math.floor((root - 1.0) / SIGMA_GRID) - 2)
    while True:
        s = 1.0 + k * SIGMA_GRID
        if s**3 - s > B:
            break
        k += 1
    return TranslationParams(s + SIGMA_MARGIN, float(B))


def translate_field(ext: ExtendedField, params: TranslationParams) -> PolynomialField:
    """Field ``Y(y) = ext(y - sigma 1)`` on the positive orthant."""
    return ext.poly.shift(params.sigma * np.ones(ext.n))


def self_consistent_sigma(base: PolynomialField, samples: int = 4096, seed: int = 0, max_iter: int = 50) -> TranslationParams:
    """Iterate sigma -> choose_sigma(B(sigma)) until the bound holds at the chosen sigma.

    The certification region scales with sigma, so the bound must be
    re-estimated at every candidate.
    """
    sigma = 1.0 + SIGMA_MARGIN
    for _ in range(max_iter):
        B = estimate_bound_B(base, sigma, samples, seed)
        if cubic_margin_exact(sigma, B) > 0:
            return TranslationParams(sigma, B)
        sigma = max(choose_sigma(B).sigma, sigma + SIGMA_MARGIN)
    raise RejectedInput(
        "could not find a translation satisfying the boundary condition; the bound grows like "
        f"sigma^{base.degree} on the scaled slabs, which outruns sigma^3 for degree >= 3")


@dataclass(frozen=True)
class SphereEmbedding:
    """Everything produced by :func:`sphere_poly_to_game`."""

    game: MatrixGame
    emap: EmbeddingMap
    params: TranslationParams
    extended: ExtendedField
    translated: PolynomialField
    glv: GlvSystem

    def forward(self, x):
        """Base coordinates -> simplex."""
        return self.emap.forward(np.asarray(x, dtype=float) + self.params.sigma)

    def inverse(self, p):
        """Simplex -> base coordinates."""
        return self.emap.inverse(p) - self.params.sigma

    def simulate(self, x0, tau_end: float, rel_tol=1e-11, abs_tol=1e-13, max_step=np.inf) -> Trajectory:
        """Replicator orbit from ``forward(x0)`` pulled back, indexed by base-flow time."""
        traj = simulate_with_clock(self.game, self.forward(x0), tau_end, rel_tol, abs_tol, max_step)
        return traj.map(self.inverse)

    def to_json(self) -> dict:
        return {
            "game": self.game.to_json(),
            "map": self.emap.to_json(),
            "sigma": self.params.sigma,
            "B": self.params.B_bound,
            "region": self.params.region,
            "base": self.extended.base.to_json(),
            "translated": self.translated.to_json(),
            "glv": self.glv.to_json(),
        }


def sphere_poly_to_game(base: PolynomialField, params: Optional[TranslationParams] = None) -> SphereEmbedding:
    """extend -> translate -> rewrite as GLV -> embed into a matrix game."""
    ext = extend_to_ambient(base)
    params = self_consistent_sigma(base) if params is None else params
    Y = translate_field(ext, params)
    glv = poly_to_glv(Y)
    game, emap = embed_glv(glv)
    return SphereEmbedding(game, emap, params, ext, Y, glv)

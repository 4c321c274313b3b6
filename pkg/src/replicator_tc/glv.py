"""Generalized Lotka-Volterra systems and their embedding into replicator dynamics.

Pipeline: polynomial field -> GLV system -> quasi-monomial reduction to a
Lotka-Volterra system in ``u_j = prod_k x_k^{B_jk}`` -> lift of the LV
system to replicator dynamics on a game with one extra action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FaceProximityError, RejectedInput
from .game import MatrixGame, SimplexPoint
from .integrate import Trajectory, integrate_adaptive
from .poly import PolynomialField, graded_lex_key

FACE_FLOOR = 1e-12


def _finite(name, a):
    if not np.all(np.isfinite(a)):
        raise RejectedInput(f"{name} has non-finite entries")


@dataclass(frozen=True)
class GlvSystem:
    """``x_i' = x_i (lam_i + sum_j A_ij prod_k x_k^{B_jk})`` on the positive orthant."""

    lam: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.array(self.lam, dtype=float))
        n = lam.size
        A = np.array(self.A, dtype=float).reshape(n, -1) if np.size(self.A) else np.zeros((n, 0))
        k = A.shape[1]
        B = np.array(self.B, dtype=float).reshape(k, n) if k else np.zeros((0, n))
        for name, arr in (("lambda", lam), ("A", A), ("B", B)):
            _finite(name, arr)
        if len({tuple(row) for row in B}) != k:
            raise RejectedInput("exponent rows of B must be pairwise distinct")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def m_mon(self) -> int:
        return self.B.shape[0]

    def field(self, x):
        return x * (self.lam + self.A @ np.prod(x ** self.B, axis=1))

    def to_json(self) -> dict:
        return {"lambda": self.lam.tolist(), "A": self.A.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "GlvSystem":
        try:
            lam = doc["lambda"]
            n = len(lam)
            A = np.asarray(doc.get("A", []), dtype=float)
            B = np.asarray(doc.get("B", []), dtype=float)
        except (KeyError, TypeError) as exc:
            raise RejectedInput(f"malformed GLV document: {exc!r}") from exc
        if n == 0:
            raise RejectedInput("GLV system is empty")
        return cls(lam, A.reshape(n, -1) if A.size else np.zeros((n, 0)), B)


def glv_field(sys: GlvSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise RejectedInput(f"point has shape {x.shape}, system dimension is {sys.n}")
    if not np.all(x > 0):
        raise DomainError("GLV fields are only defined on the strictly positive orthant")
    return sys.field(x)


def poly_to_glv(P: PolynomialField) -> GlvSystem:
    """Rewrite ``P_i`` as ``x_i (P_i / x_i)``; a term equal to ``x_i`` feeds ``lam_i``."""
    n = P.n
    lam = np.zeros(n)
    rows = {}
    for i, comp in enumerate(P.components):
        for c, e in comp:
            shifted = tuple(v - (1 if k == i else 0) for k, v in enumerate(e))
            if not any(shifted):
                lam[i] += c
            else:
                rows.setdefault(shifted, {})
                rows[shifted][i] = rows[shifted].get(i, 0.0) + c
    monos = sorted(rows, key=graded_lex_key)
    A = np.zeros((n, len(monos)))
    for j, mono in enumerate(monos):
        for i, c in rows[mono].items():
            A[i, j] = c
    B = np.array(monos, dtype=float).reshape(len(monos), n)
    return GlvSystem(lam, A, B)


@dataclass(frozen=True)
class LotkaVolterraSystem:
    """``u_i' = u_i (r_i + (M u)_i)``."""

    r: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.array(self.r, dtype=float))
        M = np.array(self.M, dtype=float).reshape(r.size, r.size)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "M", M)

    @property
    def m(self) -> int:
        return self.r.size

    def field(self, u):
        return u * (self.r + self.M @ u)


def augment_exponents(B: np.ndarray, A: np.ndarray):
    """Append unit rows ``e_k`` (with zero columns in ``A``) until ``B`` has full column rank."""
    n = A.shape[0]
    B_aug, added = B.copy(), 0
    rank = np.linalg.matrix_rank(B_aug) if B_aug.size else 0
    for k in range(n):
        if rank == n:
            break
        cand = np.vstack([B_aug, np.eye(n)[k]])
        r = np.linalg.matrix_rank(cand)
        if r > rank:
            B_aug, rank, added = cand, r, added + 1
    A_aug = np.hstack([A, np.zeros((n, added))])
    return B_aug, A_aug


def brenig_reduce(sys: GlvSystem):
    """Quasi-monomial reduction; returns ``(LotkaVolterraSystem, augmented B)``."""
    B, A = augment_exponents(sys.B, sys.A)
    return LotkaVolterraSystem(B @ sys.lam, B @ A), B


@dataclass(frozen=True)
class HofbauerMap:
    """``u <-> (u, 1) / (1 + sum u)`` between the orthant and the simplex interior."""

    m: int

    def forward(self, u):
        u = np.asarray(u, dtype=float)
        return np.append(u, 1.0) / (1.0 + u.sum())

    def inverse(self, p):
        p = np.asarray(p, dtype=float)
        if p[-1] < FACE_FLOOR:
            raise FaceProximityError(f"last coordinate {p[-1]:.3e} is below {FACE_FLOOR:g}")
        return p[:-1] / p[-1]


def hofbauer_lift(lv: LotkaVolterraSystem):
    """Game ``[[M, r], [0, 0]]`` whose replicator flow is the LV flow slowed by ``x_{m+1}``."""
    m = lv.m
    At = np.zeros((m + 1, m + 1))
    At[:m, :m] = lv.M
    At[:m, m] = lv.r
    return MatrixGame(At), HofbauerMap(m + 1)


@dataclass(frozen=True)
class EmbeddingMap:
    """Diffeomorphism from the positive orthant onto an invariant piece of the simplex."""

    B: np.ndarray
    B_left_inverse: np.ndarray
    m: int
    n_monomials: int = 0

    @classmethod
    def from_exponents(cls, B, n_monomials=0):
        B = np.asarray(B, dtype=float)
        return cls(B, np.linalg.pinv(B), B.shape[0] + 1, n_monomials)

    @property
    def n(self) -> int:
        return self.B.shape[1]

    def monomials(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(x > 0):
            raise DomainError("embedding is only defined on the strictly positive orthant")
        return np.prod(x ** self.B, axis=1)

    def forward(self, x):
        u = self.monomials(x)
        return np.append(u, 1.0) / (1.0 + u.sum())

    def inverse(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.m,):
            raise RejectedInput(f"simplex point must have {self.m} coordinates")
        if p[-1] < FACE_FLOOR:
            raise FaceProximityError(f"last coordinate {p[-1]:.3e} is below {FACE_FLOOR:g}")
        return np.exp(self.B_left_inverse @ (np.log(p[:-1]) - math.log(p[-1])))

    def pushforward(self, x, v):
        """Directional derivative ``Df(x) v``."""
        x = np.asarray(x, dtype=float)
        u = self.monomials(x)
        du = u * (self.B @ (np.asarray(v, dtype=float) / x))
        S = 1.0 + u.sum()
        return np.append(du, 0.0) / S - np.append(u, 1.0) * du.sum() / S**2

    def to_json(self) -> dict:
        return {
            "B": self.B.tolist(),
            "B_left_inverse": self.B_left_inverse.tolist(),
            "m": self.m,
            "n_monomials": self.n_monomials,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EmbeddingMap":
        try:
            return cls(
                np.asarray(doc["B"], dtype=float),
                np.asarray(doc["B_left_inverse"], dtype=float),
                int(doc["m"]),
                int(doc.get("n_monomials", 0)),
            )
        except KeyError as exc:
            raise RejectedInput(f"embedding map document missing key {exc}") from exc


def embed_glv(sys: GlvSystem):
    """Return ``(MatrixGame, EmbeddingMap)`` realising ``sys`` inside replicator dynamics."""
    lv, B = brenig_reduce(sys)
    game, _ = hofbauer_lift(lv)
    return game, EmbeddingMap.from_exponents(B, sys.m_mon)


class PushforwardCheck(NamedTuple):
    residual: float
    factor: float
    fixed_point: bool


def pushforward_residual(sys: GlvSystem, emap: EmbeddingMap, game: MatrixGame, x) -> PushforwardCheck:
    """Relative size of the part of ``Df(x) glv(x)`` not parallel to the replicator velocity.

    ``factor`` is the ratio replicator/pushforward along the common direction;
    for the exact embedding it equals the last simplex coordinate.
    """
    x = np.asarray(x, dtype=float)
    v = emap.pushforward(x, glv_field(sys, x))
    w = game.field(emap.forward(x))
    nv, nw = np.linalg.norm(v), np.linalg.norm(w)
    if nv == 0.0 and nw == 0.0:
        return PushforwardCheck(0.0, 0.0, True)
    if nv == 0.0 or nw == 0.0:
        return PushforwardCheck(1.0, 0.0, False)
    factor = float(v @ w) / nv**2
    perp = v - (v @ w) / nw**2 * w
    return PushforwardCheck(float(np.linalg.norm(perp) / max(nv, nw)), factor, False)


def simulate_with_clock(game: MatrixGame, p0, tau_end: float, rel_tol=1e-11, abs_tol=1e-13, max_step=np.inf):
    """Replicator dynamics with the clock ``tau' = p_last`` integrated alongside.

    Returns a simplex :class:`Trajectory` sampled at clock times ``tau``
    (the time of the embedded system), ending exactly at ``tau_end``.
    """
    p0 = SimplexPoint(p0).x
    if p0.size != game.m:
        raise RejectedInput("start point does not match the game size")
    m = game.m

    def aug(z):
        p = z[:m]
        return np.append(game.field(p), p[-1])

    def clocked(z):
        p = z[:m]
        return np.append(game.field(p) / p[-1], 1.0)

    def inside(z):
        p = z[:m]
        return p.min() >= -1e-9 and abs(p.sum() - 1.0) <= 1e-9

    z = np.append(p0, 0.0)
    taus, states = [0.0], [p0]
    while True:
        if z[m - 1] < FACE_FLOOR:
            raise FaceProximityError(f"last coordinate fell below {FACE_FLOOR:g} at clock time {z[m]:.6g}")
        remaining = tau_end - z[m]
        chunk = 1.05 * remaining / max(z[m - 1], FACE_FLOOR)
        tr = integrate_adaptive(aug, z, chunk, rel_tol, abs_tol, max_step=max_step, domain=inside)
        keep = tr.states[1:, m] < tau_end
        for s in tr.states[1:][keep]:
            taus.append(s[m])
            states.append(s[:m])
        if not keep.all():
            break
        z = tr.final
    # finish the last partial clock interval in clock time
    last = np.append(states[-1], taus[-1])
    tail = integrate_adaptive(clocked, last, tau_end - taus[-1], rel_tol, abs_tol, domain=inside).final
    taus.append(tau_end)
    states.append(tail[:m])
    return Trajectory(np.array(taus), np.array(states))

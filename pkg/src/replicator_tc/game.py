"""Matrix games and replicator dynamics on the simplex."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainEscape, IntegrationDrift, RejectedInput
from .integrate import Trajectory, integrate_adaptive

INTERIOR_FLOOR = 1e-300
SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class MatrixGame:
    """Symmetric single-population game with payoff matrix ``A``."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise RejectedInput(f"payoff matrix must be square and non-empty, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise RejectedInput("payoff matrix has non-finite entries")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def field(self, x):
        """Unchecked replicator right-hand side, for use inside integrators.

        The mean payoff is taken as ``x^T A x / sum(x)``.  On the simplex this
        is the usual field; off it, ``sum(x)`` is conserved instead of being
        repelled from 1 whenever ``x^T A x < 0``, so rounding does not grow.
        """
        Ax = self.A @ x
        return x * (Ax - (x @ Ax) / x.sum())

    def payoff_field(self, y):
        return self.A @ logit(y)

    def to_json(self) -> dict:
        return {"m": self.m, "A": self.A.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "MatrixGame":
        try:
            game = cls(np.asarray(doc["A"], dtype=float))
        except KeyError as exc:
            raise RejectedInput(f"game document missing key {exc}") from exc
        if "m" in doc and int(doc["m"]) != game.m:
            raise RejectedInput(f"declared m={doc['m']} but matrix is {game.m}x{game.m}")
        return game

    def to_csv(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows([[repr(float(v)) for v in row] for row in self.A])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MatrixGame":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        try:
            return cls(np.array([[float(v) for v in r] for r in rows]))
        except ValueError as exc:
            raise RejectedInput(f"bad payoff CSV: {exc}") from exc


@dataclass(frozen=True)
class SimplexPoint:
    """Validated mixed strategy."""

    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise RejectedInput("simplex point must be a finite vector")
        if x.min() < 0 or abs(x.sum() - 1.0) > SIMPLEX_TOL:
            raise RejectedInput(f"not on the simplex: min={x.min():.3e}, sum-1={x.sum() - 1.0:.3e}")
        object.__setattr__(self, "x", x)

    @property
    def interior(self) -> bool:
        return bool(self.x.min() >= INTERIOR_FLOOR)

    def __array__(self, dtype=None, copy=None):
        return self.x if dtype is None else self.x.astype(dtype)


def replicator_field(game: MatrixGame, x) -> np.ndarray:
    """``x_i ((A x)_i - x^T A x)``."""
    x = SimplexPoint(x).x
    if x.size != game.m:
        raise RejectedInput(f"point has {x.size} coordinates, game has {game.m} actions")
    return game.field(x)


def logit(y) -> np.ndarray:
    """Softmax with max-subtraction."""
    y = np.asarray(y, dtype=float)
    z = np.exp(y - y.max())
    return z / z.sum()


def _check_simplex_traj(traj: Trajectory, interior: bool = True):
    sums = np.abs(traj.states.sum(axis=1) - 1.0)
    bad = np.nonzero((sums > SIMPLEX_TOL) | (traj.states.min(axis=1) <= (0.0 if interior else -SIMPLEX_TOL)))[0]
    if bad.size:
        k = bad[0]
        raise IntegrationDrift(f"trajectory left the simplex at t={traj.times[k]:.6g}", time=float(traj.times[k]))


def simulate_replicator(game: MatrixGame, x0, t_end: float, rel_tol=1e-10, abs_tol=1e-12, t_eval=None, max_step=np.inf):
    """Integrate replicator dynamics from an interior point."""
    p = SimplexPoint(x0)
    if not p.interior:
        raise RejectedInput("replicator simulation needs a strictly interior start")
    if p.x.size != game.m:
        raise RejectedInput(f"start has {p.x.size} coordinates, game has {game.m} actions")
    try:
        traj = integrate_adaptive(game.field, p.x, t_end, rel_tol, abs_tol, t_eval=t_eval, max_step=max_step, domain="simplex")
    except DomainEscape as exc:
        raise IntegrationDrift(f"trajectory left the simplex at t={exc.time:.6g}", time=exc.time) from exc
    _check_simplex_traj(traj)
    return traj


def replicator_from_payoffs(game: MatrixGame, y0, t_end: float, rel_tol=1e-10, abs_tol=1e-12, t_eval=None):
    """Integrate cumulative payoffs ``y' = A logit(y)`` and map states through logit."""
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (game.m,) or not np.all(np.isfinite(y0)):
        raise RejectedInput("y0 must be a finite vector with one entry per action")
    traj = integrate_adaptive(game.payoff_field, y0, t_end, rel_tol, abs_tol, t_eval=t_eval)
    return Trajectory(traj.times, np.array([logit(y) for y in traj.states]))

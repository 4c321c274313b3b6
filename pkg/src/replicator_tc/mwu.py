"""Multiplicative weights as an Euler discretisation of replicator dynamics.

MWU takes Euler steps on the cumulative payoffs ``y`` and reads strategies
through the logit map.  This module measures its one-step and accumulated
deviation from the replicator flow and evaluates the matching analytic
bounds (first-order local bound, discrete Gronwall global bound).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InfeasibleStepSize, NumericOverflow, RejectedInput
from .game import MatrixGame, SimplexPoint, logit, simulate_replicator
from .integrate import Trajectory

REFERENCE_TOL = 1e-12
ETA_CAP = 0.1
ETA_FLOOR = 1e-9


class UnnormalizedGameWarning(UserWarning):
    pass


def normalize_game(game: MatrixGame) -> MatrixGame:
    """Divide by the largest absolute entry so payoffs lie in [-1, 1]."""
    a = np.abs(game.A).max()
    if a == 0.0 or a == 1.0:
        return game
    return MatrixGame(game.A / a)


def is_normalized(game: MatrixGame) -> bool:
    return bool(np.abs(game.A).max() <= 1.0 + 1e-12)


@dataclass(frozen=True)
class MwuState:
    y: np.ndarray
    x: np.ndarray
    step_index: int
    eta: float

    @classmethod
    def start(cls, x0, eta: float) -> "MwuState":
        p = SimplexPoint(x0)
        if not p.interior or p.x.min() <= 0:
            raise RejectedInput("MWU needs a strictly interior start")
        if not eta > 0:
            raise RejectedInput("step size must be positive")
        # x^0 is x0 itself; logit(log x0) only agrees up to rounding
        return cls(np.log(p.x), p.x.copy(), 0, float(eta))


def mwu_step(game: MatrixGame, state: MwuState, check_normalized: bool = True) -> MwuState:
    """``y <- y + eta A x``, ``x <- logit(y)``."""
    if check_normalized and not is_normalized(game):
        warnings.warn("MWU on a game with payoffs outside [-1, 1]", UnnormalizedGameWarning, stacklevel=2)
    Ax = game.A @ state.x
    y = state.y + state.eta * Ax
    if not np.all(np.isfinite(y)):
        raise NumericOverflow(f"cumulative payoffs became non-finite at step {state.step_index + 1}")
    # a uniform payoff shift leaves logit unchanged; skip the rounding of a renormalisation
    x = state.x if np.ptp(Ax) == 0.0 else logit(y)
    if x.min() <= 0.0:
        raise NumericOverflow(f"a logit weight underflowed to zero at step {state.step_index + 1}")
    return MwuState(y, x, state.step_index + 1, state.eta)


def simulate_mwu(game: MatrixGame, x0, eta: float, steps: int, check_normalized: bool = True) -> Trajectory:
    """Iterate MWU from ``y0 = log x0``; sample ``k`` sits at time ``k * eta``."""
    if check_normalized and not is_normalized(game):
        warnings.warn("MWU on a game with payoffs outside [-1, 1]", UnnormalizedGameWarning, stacklevel=2)
    state = MwuState.start(x0, eta)
    xs = [state.x]
    for _ in range(int(steps)):
        state = mwu_step(game, state, check_normalized=False)
        xs.append(state.x)
    return Trajectory(eta * np.arange(len(xs)), np.array(xs))


def local_error_bound(eta: float) -> float:
    """One-step bound ``1 - exp(-2 eta)``."""
    if not eta > 0:
        raise RejectedInput("step size must be positive")
    return -math.expm1(-2.0 * eta)


def _reference_flow(game, x, t_end, t_eval=None):
    return simulate_replicator(game, x, t_end, REFERENCE_TOL, REFERENCE_TOL, t_eval=t_eval)


def measure_local_error(game: MatrixGame, x, eta: float) -> float:
    """``|x^1 - Phi(eta, x)|_inf`` for one MWU step from ``x``."""
    x = SimplexPoint(x).x
    one = mwu_step(game, MwuState.start(x, eta), check_normalized=False).x
    ref = _reference_flow(game, x, eta).final
    return float(np.abs(one - ref).max())


def lipschitz_bound(game: MatrixGame) -> float:
    """Certified sup-norm Lipschitz constant of the replicator field on the simplex.

    For a tangent direction ``v`` (``sum v = 0``, ``|v|_inf <= 1``) the
    Jacobian-vector product is
    ``v_i((Ax)_i - x'Ax) + x_i((Av)_i - v'Ax - x'Av)``.  With ``a = max|A_ij|``
    and ``R_i`` the absolute row sums: the first term is at most ``2a``,
    ``|(Av)_i| <= R_i``, and since ``v`` sums to zero each of ``v'Ax`` and
    ``x'Av`` is at most ``m a`` (centre the payoffs at their midrange).  With
    ``x_i <= 1`` this gives ``2a + max_i R_i + 2 m a``.
    """
    A = game.A
    a = float(np.abs(A).max())
    return 2.0 * a + float(np.abs(A).sum(axis=1).max()) + 2.0 * game.m * a


def global_error_bound(eta: float, L: float, steps: int) -> float:
    """Discrete Gronwall bound after ``steps`` MWU iterations.

    ``(1 - e^{-2 eta}) (e^{steps eta L} - 1) / (e^{eta L} - 1)``; equals the
    local bound at ``steps = 1``.  The local term is first order in ``eta``,
    so at a fixed horizon ``steps * eta = T`` the bound tends to
    ``2 (e^{T L} - 1) / L`` rather than to zero as ``eta -> 0``.
    """
    if not (eta > 0 and L >= 0):
        raise RejectedInput("need eta > 0 and L >= 0")
    if steps < 0:
        raise RejectedInput("step count must be nonnegative")
    if steps == 0:
        return 0.0
    if steps == 1:
        return local_error_bound(eta)
    if L == 0:
        # Gronwall with unit growth factor
        return steps * local_error_bound(eta)
    try:
        growth = math.expm1(steps * eta * L) / math.expm1(eta * L)
    except OverflowError:
        return math.inf
    return local_error_bound(eta) * growth


def select_step_size(L: float, t_horizon: float, epsilon: float, eta_max: float = ETA_CAP,
                     resolution: float = ETA_FLOOR) -> float:
    """Largest ``eta <= eta_max`` with ``global_error_bound(eta, L, ceil(T/eta)) <= epsilon``.

    A log-spaced scan from ``eta_max`` down to ``resolution`` finds the
    largest feasible grid point; bisection then pushes it up against the
    next infeasible grid point.  The returned value always satisfies the
    constraint.
    """
    if not (L > 0 and t_horizon > 0 and epsilon > 0):
        raise RejectedInput("need L, t_horizon and epsilon all positive")

    def g(eta):
        return global_error_bound(eta, L, math.ceil(t_horizon / eta - 1e-12))

    if g(eta_max) <= epsilon:
        return eta_max
    grid = np.geomspace(eta_max, resolution, 400)
    feasible = [k for k, eta in enumerate(grid) if g(eta) <= epsilon]
    if not feasible:
        raise InfeasibleStepSize(
            f"no step size in [{resolution:g}, {eta_max:g}] meets epsilon={epsilon:g}; "
            f"bound at the floor is {g(resolution):.6g}",
            bound_at_floor=g(resolution),
        )
    k = feasible[0]
    lo, hi = float(grid[k]), float(grid[k - 1])
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if g(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class ErrorReport:
    """Measured discretisation errors next to their analytic bounds."""

    etas: list = field(default_factory=list)
    measured_local: list = field(default_factory=list)
    local_bounds: list = field(default_factory=list)
    measured_global: list = field(default_factory=list)
    global_bounds: list = field(default_factory=list)
    lipschitz_L: Optional[float] = None
    reference_tol: float = REFERENCE_TOL

    @property
    def local_ok(self) -> bool:
        return all(m <= b for m, b in zip(self.measured_local, self.local_bounds))

    @property
    def global_ok(self) -> bool:
        return all(m <= b for m, b in zip(self.measured_global, self.global_bounds))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "measured", "bound"])
        for k, (m, b) in enumerate(zip(self.measured_global, self.global_bounds)):
            w.writerow([k, repr(float(m)), repr(float(b))])
        return buf.getvalue()

    def local_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eta", "measured", "bound"])
        for row in zip(self.etas, self.measured_local, self.local_bounds):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "etas": [float(v) for v in self.etas],
            "measured_local": [float(v) for v in self.measured_local],
            "local_bounds": [float(v) for v in self.local_bounds],
            "measured_global": [float(v) for v in self.measured_global],
            "global_bounds": [float(v) for v in self.global_bounds],
            "lipschitz_L": self.lipschitz_L,
            "reference_tol": self.reference_tol,
            "local_ok": self.local_ok,
            "global_ok": self.global_ok,
        }


def measure_global_error(game: MatrixGame, x0, eta: float, steps: int, L: Optional[float] = None) -> ErrorReport:
    """Error series ``E^k = |x^k - Phi(k eta, x0)|_inf`` for ``k = 0..steps`` with bounds."""
    x0 = SimplexPoint(x0).x
    L = lipschitz_bound(game) if L is None else L
    mwu = simulate_mwu(game, x0, eta, steps, check_normalized=False)
    ref = _reference_flow(game, x0, steps * eta, t_eval=mwu.times) if steps > 0 else mwu
    measured = np.abs(mwu.states - ref.states).max(axis=1)
    bounds = [global_error_bound(eta, L, k) for k in range(steps + 1)]
    return ErrorReport(
        etas=[eta],
        measured_local=[float(measured[1])] if steps else [],
        local_bounds=[local_error_bound(eta)] if steps else [],
        measured_global=measured.tolist(),
        global_bounds=bounds,
        lipschitz_L=L,
    )


def sweep_local_errors(game: MatrixGame, points, etas) -> ErrorReport:
    """Worst one-step error over ``points`` for each step size."""
    report = ErrorReport(lipschitz_L=lipschitz_bound(game))
    for eta in etas:
        worst = max(measure_local_error(game, x, eta) for x in points)
        report.etas.append(float(eta))
        report.measured_local.append(worst)
        report.local_bounds.append(local_error_bound(eta))
    return report

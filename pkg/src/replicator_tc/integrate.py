"""ODE integration, trajectories and bounded-horizon reachability.

Fields are plain callables ``f(x) -> dx/dt`` (autonomous).  Two schemes are
provided: classical fixed-step RK4 and the Dormand-Prince 5(4) embedded
pair with elementary step-size control.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DomainEscape, RejectedInput, StiffnessError

DOMAIN_SLACK = 1e-9
MIN_STEP = 1e-14


@dataclass(frozen=True)
class Trajectory:
    """Sampled orbit: ``states[k]`` is the state at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if times.ndim != 1 or states.shape[0] != times.shape[0]:
            raise RejectedInput("times and states must have matching lengths")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise RejectedInput("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return zip(self.times, self.states)

    def max_gap(self) -> float:
        return float(np.max(np.diff(self.times))) if self.times.size > 1 else 0.0

    def map(self, fn: Callable) -> "Trajectory":
        return Trajectory(self.times, np.array([fn(s) for s in self.states]))

    def to_csv(self, names=None) -> str:
        names = names or [f"x{i + 1}" for i in range(self.n)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *names])
        for t, s in zip(self.times, self.states):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][0] != "t":
            raise RejectedInput("trajectory CSV must start with a 't, x1..xn' header")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        return cls(data[:, 0], data[:, 1:])

    def to_json(self) -> dict:
        return {"times": self.times.tolist(), "states": self.states.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "Trajectory":
        try:
            return cls(np.asarray(doc["times"]), np.asarray(doc["states"]))
        except KeyError as exc:
            raise RejectedInput(f"trajectory JSON missing key {exc}") from exc


def _domain_check(domain) -> Optional[Callable]:
    if domain is None:
        return None
    if domain == "orthant":
        return lambda x: x.min() >= -DOMAIN_SLACK
    if domain == "simplex":
        return lambda x: x.min() >= -DOMAIN_SLACK and abs(x.sum() - 1.0) <= DOMAIN_SLACK
    if callable(domain):
        return domain
    raise RejectedInput(f"unknown domain {domain!r}")


def _escape(t, x):
    raise DomainEscape(f"state left the domain at t={t:.6g}", time=t, state=np.array(x))


def rk4_step(field, x, h):
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_fixed(field, x0, t_end: float, dt: float, domain=None) -> Trajectory:
    """Classical RK4 on the grid ``0, dt, 2 dt, ...``; the last step is
    shortened so the trajectory ends exactly at ``t_end``."""
    if not (dt > 0 and t_end > 0):
        raise RejectedInput("need dt > 0 and t_end > 0")
    inside = _domain_check(domain)
    x = np.array(x0, dtype=float)
    n_full = int(math.floor(t_end / dt + 1e-9))
    times = [k * dt for k in range(n_full + 1)]
    if t_end - times[-1] > 1e-12 * max(1.0, t_end):
        times.append(t_end)
    else:
        times[-1] = t_end if n_full > 0 else times[-1]
    states = [x]
    for k in range(1, len(times)):
        x = rk4_step(field, x, times[k] - times[k - 1])
        if inside is not None and not inside(x):
            _escape(times[k], x)
        states.append(x)
    return Trajectory(np.array(times), np.array(states))


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def integrate_adaptive(
    field,
    x0,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    t_eval=None,
    max_step: float = math.inf,
    domain=None,
) -> Trajectory:
    """Dormand-Prince 5(4) with error-per-step control.

    A step is accepted when ``|err|_inf <= max(abs_tol, rel_tol * |x|_inf)``.
    Without ``t_eval`` every accepted step is recorded; with it, steps are
    clipped so the integrator lands exactly on each requested time and only
    those times (plus ``t = 0``) are recorded.
    """
    if not (0 < rel_tol <= 1e-2 and 0 < abs_tol <= 1e-2):
        raise RejectedInput("tolerances must lie in (0, 1e-2]")
    if not t_end > 0:
        raise RejectedInput("t_end must be positive")
    inside = _domain_check(domain)
    x = np.array(x0, dtype=float)
    n = x.size
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.size and (t_eval[0] < 0 or t_eval[-1] > t_end * (1 + 1e-12) or np.any(np.diff(t_eval) <= 0)):
            raise RejectedInput("t_eval must be increasing within [0, t_end]")
        targets = [t for t in t_eval if t > 0]
    else:
        targets = []
    if not targets or targets[-1] < t_end:
        targets.append(t_end)
    record_all = t_eval is None

    K = np.empty((7, n))
    t = 0.0
    K[0] = field(x)
    times, states = [0.0], [x.copy()]

    scale0 = max(abs_tol, rel_tol * np.abs(x).max(initial=0.0))
    d1 = np.abs(K[0]).max(initial=0.0)
    if d1 == 0.0:
        h = t_end
    else:
        h = min(0.01 * max(scale0, np.abs(x).max(initial=0.0)) / d1, t_end)
        h = max(h, 1e-6 * t_end)
    h = min(h, max_step)

    ti = 0
    while ti < len(targets):
        goal = targets[ti]
        span = goal - t
        hit = h >= span
        step = span if hit else h
        if step < MIN_STEP * max(1.0, abs(t)) and not hit:
            raise StiffnessError(f"step size underflow at t={t:.6g}", time=t)
        for s in range(1, 7):
            K[s] = field(x + step * (_A[s] @ K[:s]))
        x_new = x + step * (_A[6] @ K[:6])
        err = step * np.abs(_E @ K).max(initial=0.0)
        scale = max(abs_tol, rel_tol * max(np.abs(x).max(initial=0.0), np.abs(x_new).max(initial=0.0)))
        ratio = err / scale
        if not np.all(np.isfinite(x_new)):
            ratio = math.inf
        if ratio <= 1.0:
            t = goal if hit else t + step
            x = x_new
            K[0] = K[6]
            if inside is not None and not inside(x):
                _escape(t, x)
            if hit:
                ti += 1
            if record_all or hit:
                times.append(t)
                states.append(x.copy())
            grow = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio ** -0.2)
            if not hit or step >= h:
                h = min(step * grow, max_step)
        else:
            shrink = 0.2 if not math.isfinite(ratio) else max(0.2, 0.9 * ratio ** -0.2)
            h = step * shrink
            if h < MIN_STEP * max(1.0, abs(t)):
                raise StiffnessError(f"step size underflow at t={t:.6g}", time=t)
    return Trajectory(np.array(times), np.array(states))


class Verdict(str, enum.Enum):
    REACHED = "REACHED"
    NOT_REACHED_WITHIN_HORIZON = "NOT_REACHED_WITHIN_HORIZON"


@dataclass(frozen=True)
class ReachReport:
    """Outcome of a bounded-horizon reachability query.

    ``max_gap`` is the largest time gap between consecutive checked samples;
    a crossing shorter than that can be missed.
    """

    reached: bool
    hit_time: Optional[float]
    hit_state: Optional[np.ndarray]
    horizon: float
    samples_checked: int
    max_gap: float

    @property
    def verdict(self) -> Verdict:
        return Verdict.REACHED if self.reached else Verdict.NOT_REACHED_WITHIN_HORIZON

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "reached": self.reached,
            "hit_time": self.hit_time,
            "hit_state": None if self.hit_state is None else np.asarray(self.hit_state).tolist(),
            "horizon": self.horizon,
            "samples_checked": self.samples_checked,
            "max_sample_gap": self.max_gap,
        }


def reach(source: Iterable, target: Callable, horizon: float) -> ReachReport:
    """Scan ``(t, state)`` samples up to ``horizon`` for the first one in ``target``.

    ``source`` is a :class:`Trajectory` or any iterable of ``(t, state)``
    pairs (e.g. a stepwise simulator).  Only sample points are tested.
    """
    if not horizon > 0:
        raise RejectedInput("horizon must be positive")
    count, gap, prev = 0, 0.0, None
    for t, s in source:
        t = float(t)
        if t > horizon:
            break
        if prev is not None:
            gap = max(gap, t - prev)
        prev = t
        count += 1
        if target(s):
            return ReachReport(True, t, np.array(s, copy=True), horizon, count, gap)
    return ReachReport(False, None, None, horizon, count, gap)

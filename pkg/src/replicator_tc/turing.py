"""Turing machines over the digits 0-9 and their integer encoding.

Conventions: blank is ``0``; the head always sits at tape position 0 and
a move by ``sigma`` shifts the tape (``w_i <- w_{i+sigma}``).  A
configuration ``(q, w)`` is encoded as ``(y1, y2, q)`` with
``y1 = w_0 + 10 w_1 + 100 w_2 + ...`` and ``y2 = w_{-1} + 10 w_{-2} + ...``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple, Optional

import numpy as np

from .errors import RejectedInput
from .integrate import ReachReport, reach

SYMBOLS = range(10)
MOVES = (-1, 0, 1)


@dataclass(frozen=True, eq=False)
class TuringMachine:
    """States are ``1..r``; ``delta[(q, s)] = (q', s', move)``.

    ``delta`` must cover every symbol for every non-halting state; rows for
    the halting state are never consulted.
    """

    r: int
    q0: int
    q_halt: int
    delta: Mapping

    def __post_init__(self):
        if self.r < 1:
            raise RejectedInput("need at least one state")
        for name in ("q0", "q_halt"):
            q = getattr(self, name)
            if not 1 <= q <= self.r:
                raise RejectedInput(f"{name}={q} outside 1..{self.r}")
        delta = {}
        for (q, s), (q2, s2, mv) in dict(self.delta).items():
            key = (int(q), int(s))
            if not (1 <= key[0] <= self.r and key[1] in SYMBOLS):
                raise RejectedInput(f"transition key {key} outside Q x Sigma")
            if not (1 <= int(q2) <= self.r and int(s2) in SYMBOLS and int(mv) in MOVES):
                raise RejectedInput(f"transition {key} -> {(q2, s2, mv)} is invalid")
            delta[key] = (int(q2), int(s2), int(mv))
        missing = [(q, s) for q in range(1, self.r + 1) if q != self.q_halt for s in SYMBOLS if (q, s) not in delta]
        if missing:
            raise RejectedInput(f"transition table is missing (state, symbol) pairs: {missing}")
        object.__setattr__(self, "delta", delta)

    @classmethod
    def from_partial(cls, r, q0, q_halt, rules: Mapping, fill: str = "halt") -> "TuringMachine":
        """Complete a sparse table: unlisted pairs halt (``fill='halt'``) or
        loop in place (``fill='stay'``), leaving the symbol untouched."""
        delta = dict(rules)
        for q in range(1, r + 1):
            if q == q_halt:
                continue
            for s in SYMBOLS:
                if (q, s) not in delta:
                    delta[(q, s)] = (q_halt, s, 0) if fill == "halt" else (q, s, 0)
        return cls(r, q0, q_halt, delta)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "q0": self.q0,
            "q_halt": self.q_halt,
            "delta": [[q, s, *self.delta[(q, s)]] for (q, s) in sorted(self.delta)],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TuringMachine":
        try:
            delta = {}
            for row in doc["delta"]:
                q, s, q2, s2, mv = row
                delta[(q, s)] = (q2, s2, mv)
            r, q0, q_halt = int(doc["r"]), int(doc["q0"]), int(doc["q_halt"])
        except (KeyError, TypeError, ValueError) as exc:
            raise RejectedInput(f"malformed machine document: {exc!r}") from exc
        return cls(r, q0, q_halt, delta)


@dataclass(frozen=True, eq=False)
class TapeConfig:
    """State plus tape window ``w_{-k0} .. w_{k0}``; everything outside is blank."""

    q: int
    cells: tuple

    def __post_init__(self):
        cells = tuple(int(s) for s in self.cells)
        if len(cells) % 2 == 0:
            raise RejectedInput("window must have odd length 2*k0 + 1")
        if any(s not in SYMBOLS for s in cells):
            raise RejectedInput("tape symbols must be digits 0-9")
        object.__setattr__(self, "cells", cells)

    @property
    def k0(self) -> int:
        return len(self.cells) // 2

    def symbol(self, i: int) -> int:
        j = i + self.k0
        return self.cells[j] if 0 <= j < len(self.cells) else 0

    def window(self, k: int) -> tuple:
        return tuple(self.symbol(i) for i in range(-k, k + 1))

    def nonblank(self) -> tuple:
        return tuple((i - self.k0, s) for i, s in enumerate(self.cells) if s)

    def __eq__(self, other):
        if not isinstance(other, TapeConfig):
            return NotImplemented
        return self.q == other.q and self.nonblank() == other.nonblank()

    def __hash__(self):
        return hash((self.q, self.nonblank()))

    @classmethod
    def blank(cls, q: int, k0: int = 0) -> "TapeConfig":
        return cls(q, (0,) * (2 * k0 + 1))

    @classmethod
    def from_string(cls, text: str, q: int) -> "TapeConfig":
        """Parse digits with the head symbol in brackets, e.g. ``"12[3]45"``.

        Without brackets the head is on the first digit.
        """
        m = re.fullmatch(r"([0-9]*)\[([0-9])\]([0-9]*)", text.strip())
        if m:
            left, head, right = m.groups()
        elif re.fullmatch(r"[0-9]+", text.strip()):
            left, head, right = "", text.strip()[0], text.strip()[1:]
        else:
            raise RejectedInput(f"cannot parse tape {text!r}; use digits with the head in brackets, e.g. 12[3]45")
        k0 = max(len(left), len(right))
        cells = "0" * (k0 - len(left)) + left + head + right + "0" * (k0 - len(right))
        return cls(q, tuple(int(c) for c in cells))

    def to_string(self) -> str:
        s = "".join(map(str, self.cells))
        k = self.k0
        return f"{s[:k]}[{s[k]}]{s[k + 1:]}"


def tm_step(T: TuringMachine, c: TapeConfig) -> TapeConfig:
    """One global transition; the halting state is a fixed point."""
    if c.q == T.q_halt:
        return c
    q2, s2, mv = T.delta[(c.q, c.symbol(0))]
    k0 = c.k0
    cells = list(c.cells)
    cells[k0] = s2
    if mv == 0:
        return TapeConfig(q2, tuple(cells))
    # pad by one on each side so the shifted content always fits
    padded = [0] + cells + [0]
    shifted = padded[1:] + [0] if mv == 1 else [0] + padded[:-1]
    if shifted[0] == 0 and shifted[-1] == 0:
        shifted = shifted[1:-1]
    return TapeConfig(q2, tuple(shifted))


class RunOutcome(NamedTuple):
    halted: bool
    config: TapeConfig
    steps: int

    @property
    def status(self) -> str:
        return "HALTED" if self.halted else "RUNNING"


def tm_run(T: TuringMachine, c: TapeConfig, k: int) -> RunOutcome:
    """Apply at most ``k`` transitions; report the first step at which the machine halts."""
    if k < 0:
        raise RejectedInput("step budget must be nonnegative")
    for step in range(k + 1):
        if c.q == T.q_halt:
            return RunOutcome(True, c, step)
        if step == k:
            break
        c = tm_step(T, c)
    return RunOutcome(False, c, k)


class EncodedConfig(NamedTuple):
    y1: int
    y2: int
    q: int


def encode(c: TapeConfig) -> EncodedConfig:
    k0 = c.k0
    y1 = sum(c.symbol(i) * 10**i for i in range(k0 + 1))
    y2 = sum(c.symbol(-i) * 10 ** (i - 1) for i in range(1, k0 + 1))
    return EncodedConfig(y1, y2, c.q)


def _digits(y: int) -> int:
    return len(str(y)) if y > 0 else 1


def decode(e: EncodedConfig, k0: Optional[int] = None) -> TapeConfig:
    """Digit extraction.

    ``k0`` defaults to the smallest window that fits.  Values up to
    ``10^(k0+1)`` are accepted; a ``y2`` with ``k0 + 1`` digits widens the
    window by one cell rather than dropping its leading digit.
    """
    y1, y2, q = (int(v) for v in e)
    if y1 < 0 or y2 < 0:
        raise RejectedInput("encoded tape values must be nonnegative")
    need = max(_digits(y1) - 1, _digits(y2) if y2 else 0)
    if k0 is not None and (y1 >= 10 ** (k0 + 1) or y2 >= 10 ** (k0 + 1)):
        raise RejectedInput(f"({y1}, {y2}) does not fit a window with k0={k0}")
    k0 = need if k0 is None else max(k0, need)
    right = [(y1 // 10**i) % 10 for i in range(k0 + 1)]
    left = [(y2 // 10 ** (i - 1)) % 10 for i in range(k0, 0, -1)]
    return TapeConfig(q, tuple(left + right))


def on_image(T: TuringMachine, e, k0: Optional[int] = None) -> bool:
    """Whether ``e`` is the encoding of some configuration (with window ``k0``, if given)."""
    try:
        y1, y2, q = e
    except (TypeError, ValueError):
        return False
    for v in (y1, y2, q):
        if isinstance(v, (float, np.floating)) and not float(v).is_integer():
            return False
    y1, y2, q = int(y1), int(y2), int(q)
    if y1 < 0 or y2 < 0 or not 1 <= q <= T.r:
        return False
    if k0 is not None and (y1 >= 10 ** (k0 + 1) or y2 >= 10 ** (k0 + 1)):
        return False
    return True


def encoded_step(T: TuringMachine, e, k0: Optional[int] = None):
    """Conjugate of :func:`tm_step` on encoded points, the identity off the image.

    Returns ``(next_point, on_image_flag)``.
    """
    if not on_image(T, e, k0):
        return e, False
    e = EncodedConfig(*(int(v) for v in e))
    if e.q == T.q_halt:
        return e, True
    return encode(tm_step(T, decode(e))), True


@dataclass(frozen=True)
class HaltWindow:
    """Open sup-norm ``epsilon``-neighbourhood of encoded halting configurations
    whose tape reads ``w_star`` on positions ``-k..k``."""

    w_star: tuple
    epsilon: float = 0.25

    def __post_init__(self):
        w = tuple(int(s) for s in self.w_star)
        if len(w) % 2 == 0 or any(s not in SYMBOLS for s in w):
            raise RejectedInput("w_star must be an odd-length string of digits")
        if not 0 < self.epsilon < 0.5:
            raise RejectedInput("epsilon must lie in (0, 1/2)")
        object.__setattr__(self, "w_star", w)

    @property
    def k(self) -> int:
        return len(self.w_star) // 2


def halt_window_contains(U: HaltWindow, T: TuringMachine, p, k0: Optional[int] = None) -> bool:
    if all(isinstance(v, (int, np.integer)) for v in p):
        nearest, dist = tuple(int(v) for v in p), 0.0
    else:
        pf = np.asarray(p, dtype=float)
        near = np.rint(pf)
        dist = float(np.abs(pf - near).max())
        nearest = tuple(int(v) for v in near)
    if dist >= U.epsilon:
        return False
    y1, y2, q = nearest
    if q != T.q_halt or not on_image(T, nearest, k0):
        return False
    return decode(EncodedConfig(y1, y2, q)).window(U.k) == U.w_star


def encoded_orbit(T: TuringMachine, c: TapeConfig, k: int) -> Iterator:
    """``(step, point)`` pairs of the encoded orbit for ``k`` steps."""
    e = encode(c)
    yield 0, e
    for step in range(1, k + 1):
        e, _ = encoded_step(T, e)
        yield step, e


def tm_reach_check(T: TuringMachine, c: TapeConfig, w_star, epsilon: float = 0.25, k: int = 1000) -> ReachReport:
    """Bounded reachability of the halting window along the encoded orbit."""
    U = HaltWindow(tuple(w_star), epsilon)
    return reach(encoded_orbit(T, c, k), lambda p: halt_window_contains(U, T, p), horizon=max(k, 1e-9))

"""Multivariate polynomial vector fields.

A field on R^n is stored as ``n`` components, each a tuple of
``(coefficient, exponents)`` terms.  Exponent tuples are dense (one entry
per variable) and every component is kept merged and sorted in graded
lexicographic order: ascending total degree, then descending lexicographic
exponents, so ``1 < x1 < x2 < x1^2 < x1 x2 < x2^2 < ...``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import RejectedInput

Monomial = tuple  # exponent tuple, one entry per variable


def graded_lex_key(exponents: Sequence[float]):
    """Sort key realising the graded lexicographic order used everywhere."""
    return (sum(exponents), tuple(-e for e in exponents))


def _merge_terms(terms, n, integral=True):
    acc = {}
    for c, e in terms:
        e = tuple(int(v) for v in e) if integral else tuple(float(v) for v in e)
        if len(e) != n:
            raise RejectedInput(f"monomial {e} has length {len(e)}, expected {n}")
        if integral and any(v < 0 for v in e):
            raise RejectedInput(f"negative exponent in polynomial monomial {e}")
        if not all(math.isfinite(v) for v in e):
            raise RejectedInput(f"non-finite exponent in {e}")
        c = float(c)
        if not math.isfinite(c):
            raise RejectedInput(f"non-finite coefficient {c}")
        acc[e] = acc.get(e, 0.0) + c
    return tuple((c, e) for e, c in sorted(acc.items(), key=lambda kv: graded_lex_key(kv[0])) if c != 0.0)


@dataclass(frozen=True)
class PolynomialField:
    """Polynomial vector field ``x' = (P_1(x), ..., P_n(x))``."""

    n: int
    components: tuple
    _E: np.ndarray = field(init=False, repr=False, compare=False)
    _C: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise RejectedInput("dimension must be positive")
        if len(self.components) != self.n:
            raise RejectedInput(f"expected {self.n} components, got {len(self.components)}")
        comps = tuple(_merge_terms(terms, self.n) for terms in self.components)
        object.__setattr__(self, "components", comps)
        monos = sorted({e for comp in comps for _, e in comp}, key=graded_lex_key)
        index = {e: k for k, e in enumerate(monos)}
        E = np.array(monos, dtype=np.int64).reshape(len(monos), self.n)
        C = np.zeros((self.n, len(monos)))
        for i, comp in enumerate(comps):
            for c, e in comp:
                C[i, index[e]] = c
        object.__setattr__(self, "_E", E)
        object.__setattr__(self, "_C", C)

    @classmethod
    def from_dicts(cls, dicts: Sequence[dict]) -> "PolynomialField":
        """Build from one ``{exponents: coefficient}`` mapping per component."""
        n = len(dicts)
        return cls(n, tuple(tuple((c, e) for e, c in d.items()) for d in dicts))

    @classmethod
    def zero(cls, n: int) -> "PolynomialField":
        return cls(n, tuple(() for _ in range(n)))

    @property
    def degree(self) -> int:
        return max((sum(e) for comp in self.components for _, e in comp), default=0)

    def monomials(self) -> list:
        """Distinct monomials across all components, graded-lex ordered."""
        return [tuple(int(v) for v in row) for row in self._E]

    def as_dicts(self) -> list:
        return [{e: c for c, e in comp} for comp in self.components]

    def __call__(self, x):
        return eval_field(self, x)

    def eval_many(self, X) -> np.ndarray:
        """Evaluate at each row of an ``(N, n)`` array."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise RejectedInput(f"expected shape (N, {self.n}), got {X.shape}")
        if self._E.shape[0] == 0:
            return np.zeros_like(X)
        powers = np.prod(X[:, None, :] ** self._E[None, :, :], axis=2)
        return powers @ self._C.T

    def scale(self, c: float) -> "PolynomialField":
        return PolynomialField(self.n, tuple(tuple((c * a, e) for a, e in comp) for comp in self.components))

    def __add__(self, other: "PolynomialField") -> "PolynomialField":
        if not isinstance(other, PolynomialField) or other.n != self.n:
            return NotImplemented
        return PolynomialField(self.n, tuple(a + b for a, b in zip(self.components, other.components)))

    def shift(self, offset) -> "PolynomialField":
        """Return ``Q`` with ``Q(y) = P(y - offset)``, expanded exactly."""
        offset = np.broadcast_to(np.asarray(offset, dtype=float), (self.n,))
        new = []
        for comp in self.components:
            acc = {}
            for c, e in comp:
                # expand prod_k (y_k - o_k)^{e_k} one variable at a time
                partial = {(): c}
                for k, ek in enumerate(e):
                    nxt = {}
                    for head, coef in partial.items():
                        for j in range(ek + 1):
                            w = coef * math.comb(ek, j) * (-offset[k]) ** (ek - j)
                            key = head + (j,)
                            nxt[key] = nxt.get(key, 0.0) + w
                    partial = nxt
                for key, coef in partial.items():
                    acc[key] = acc.get(key, 0.0) + coef
            new.append(tuple((coef, key) for key, coef in acc.items()))
        return PolynomialField(self.n, tuple(new))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "components": [[{"c": c, "e": list(e)} for c, e in comp] for comp in self.components],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PolynomialField":
        try:
            n = int(doc["n"])
            comps = tuple(tuple((t["c"], tuple(t["e"])) for t in comp) for comp in doc["components"])
        except (KeyError, TypeError) as exc:
            raise RejectedInput(f"malformed polynomial field document: {exc!r}") from exc
        return cls(n, comps)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def eval_field(field: PolynomialField, x) -> np.ndarray:
    """Evaluate every component at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (field.n,):
        raise RejectedInput(f"point has shape {x.shape}, field dimension is {field.n}")
    if field._E.shape[0] == 0:
        return np.zeros(field.n)
    return field._C @ np.prod(x[None, :] ** field._E, axis=1)


def tangency_residual(field: PolynomialField, x, tol: float = 1e-12) -> float:
    """Return ``sum_i x_i P_i(x)`` for a point on the unit sphere."""
    x = np.asarray(x, dtype=float)
    if abs(float(x @ x) - 1.0) > tol:
        raise RejectedInput(f"point is off the unit sphere: |x|^2 - 1 = {float(x @ x) - 1.0:.3e}")
    return float(x @ eval_field(field, x))


def count_monomials(n: int, d: int) -> int:
    """Number of monomials of total degree at most ``d`` in ``n`` variables."""
    if n < 1 or d < 0:
        raise RejectedInput("need n >= 1 and d >= 0")
    return math.comb(n + d, n)


def game_size_bound(n: int, d: int) -> int:
    """Largest game size the embedding can need for a degree-``d`` field on R^n."""
    return count_monomials(n, d) + 1


def rotation_field(n: int = 2, pairs: Iterable[tuple] = ((0, 1),), rates=None) -> PolynomialField:
    """Linear skew field rotating each coordinate pair ``(i, j)``."""
    comps = [dict() for _ in range(n)]
    pairs = list(pairs)
    rates = [1.0] * len(pairs) if rates is None else list(rates)
    for (i, j), w in zip(pairs, rates):
        ei = tuple(1 if k == i else 0 for k in range(n))
        ej = tuple(1 if k == j else 0 for k in range(n))
        comps[i][ej] = comps[i].get(ej, 0.0) - w
        comps[j][ei] = comps[j].get(ei, 0.0) + w
    return PolynomialField.from_dicts(comps)

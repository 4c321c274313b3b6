"""Shared generators and independent oracles for the test suite."""

import numpy as np

from replicator_tc.errors import NumericFailure
from replicator_tc.glv import GlvSystem
from replicator_tc.integrate import integrate_adaptive


def random_glv(rng, n_max=3, m_max=5):
    n = int(rng.integers(1, n_max + 1))
    # only 4^n - 1 nonzero rows exist with entries in {-1, 0, 1, 2}
    k = int(rng.integers(1, min(m_max, 4**n - 1) + 1))
    rows = set()
    while len(rows) < k:
        row = tuple(int(v) for v in rng.integers(-1, 3, size=n))
        if any(row):
            rows.add(row)
    B = np.array(sorted(rows), dtype=float)
    A = rng.uniform(-1.0, 1.0, size=(n, k))
    lam = rng.uniform(-1.0, 1.0, size=n)
    return GlvSystem(lam, A, B)


def bounded_glv_cases(rng, count, t_end=5.0, lo=1e-2, hi=1e2, **kw):
    """Random GLV systems with starts whose direct orbit stays in ``[lo, hi]^n`` up to ``t_end``."""
    out = []
    while len(out) < count:
        sys = random_glv(rng, **kw)
        x0 = rng.uniform(0.5, 2.0, size=sys.n)
        try:
            tr = integrate_adaptive(sys.field, x0, t_end, 1e-10, 1e-12, domain="orthant")
        except NumericFailure:
            continue
        if tr.states.min() > lo and tr.states.max() < hi:
            out.append((sys, x0))
    return out


def pascal_counts(n_max, d_max):
    """``C[n][d]`` = number of monomials of degree <= d in n variables, by Pascal's rule."""
    # C(n, d) = C(n - 1, d) + C(n, d - 1): split on whether the last variable appears
    C = [[1] * (d_max + 1) for _ in range(n_max + 1)]
    for n in range(1, n_max + 1):
        for d in range(1, d_max + 1):
            C[n][d] = C[n - 1][d] + C[n][d - 1]
    return C


def fd_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h * max(1.0, abs(x[k]))
        cols.append((f(x + e) - f(x - e)) / (2 * e[k]))
    return np.column_stack(cols)


def dict_tm(rules, q0, q_halt, tape, budget):
    """Independent simulator: sparse dict tape and an explicit head index.

    Unlisted ``(state, symbol)`` pairs halt without writing or moving.
    Returns ``(halted, steps, tape_dict, head)``.
    """
    tape = dict(tape)
    head, q = 0, q0
    for step in range(budget + 1):
        if q == q_halt:
            return True, step, {k: v for k, v in tape.items() if v}, head
        if step == budget:
            break
        sym = tape.get(head, 0)
        q, tape[head], mv = rules.get((q, sym), (q_halt, sym, 0))
        head += mv
    return False, budget, {k: v for k, v in tape.items() if v}, head

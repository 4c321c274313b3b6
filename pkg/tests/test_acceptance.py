"""End-to-end acceptance battery.

Each test prints a single ``[PASS]``/``[FAIL]`` line with its headline
numbers, then asserts.  Run standalone with ``python tests/test_acceptance.py``.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import bounded_glv_cases, dict_tm, fd_jacobian, pascal_counts, random_glv  # noqa: E402
from machines import busy_beaver_3, cycler, decimal_incrementer, immediate_halt, unary_incrementer  # noqa: E402
from replicator_tc.game import MatrixGame, simulate_replicator  # noqa: E402
from replicator_tc.glv import embed_glv, glv_field, poly_to_glv, pushforward_residual, simulate_with_clock  # noqa: E402
from replicator_tc.integrate import integrate_adaptive  # noqa: E402
from replicator_tc.mwu import (  # noqa: E402
    global_error_bound,
    local_error_bound,
    measure_global_error,
    measure_local_error,
    normalize_game,
    select_step_size,
    simulate_mwu,
)
from replicator_tc.poly import PolynomialField, count_monomials, game_size_bound, rotation_field  # noqa: E402
from replicator_tc.presets import LORENZ_START, logistic_glv, lorenz_field, shifted_lorenz  # noqa: E402
from replicator_tc.sphere import (  # noqa: E402
    cubic_margin_exact,
    extend_to_ambient,
    logistic_radius,
    radial_residual,
    self_consistent_sigma,
    translate_field,
)
from replicator_tc.turing import (  # noqa: E402
    TapeConfig,
    TuringMachine,
    decode,
    encode,
    encoded_step,
    tm_reach_check,
    tm_run,
    tm_step,
)


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {tag}: {detail}")
        return ok
    return emit


def random_game(rng, m):
    return MatrixGame(rng.uniform(-1.0, 1.0, size=(m, m)))


def twisted_rotation(a=1.0, b=0.5):
    """Globally tangent quadratic field ``K(x) x``, ``K`` skew with entries ``a + b x0``."""
    return PolynomialField.from_dicts([
        {(0, 1): a, (1, 1): b},
        {(1, 0): -a, (2, 0): -b},
    ])


SPHERE_FIELDS = {
    "rotation2": rotation_field(),
    "rotation3": rotation_field(3, pairs=((0, 1), (1, 2)), rates=(1.0, 0.5)),
    "twisted2": twisted_rotation(),
}


# ---------------------------------------------------------------- 1

def test_simplex_conservation(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst_sum, worst_min = 0.0, np.inf
    for _ in range(100):
        m = int(rng.integers(2, 11))
        tr = simulate_replicator(random_game(rng, m), rng.dirichlet(np.ones(m)), 50.0, 1e-10, 1e-12)
        worst_sum = max(worst_sum, float(np.abs(tr.states.sum(axis=1) - 1).max()))
        worst_min = min(worst_min, float(tr.states.min()))
    dt = time.perf_counter() - t0
    ok = worst_sum <= 1e-8 and worst_min > 0 and dt < 30
    report("1 simplex conservation", ok, f"max|sum-1|={worst_sum:.2e} min x={worst_min:.2e} {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2

def test_orbit_equivalence(report):
    t0 = time.perf_counter()
    worst = 0.0
    cases = list(bounded_glv_cases(np.random.default_rng(202), 20, t_end=5.0))
    assert len(cases) == 20
    for sys_, x0 in cases:
        assert sys_.n <= 3 and sys_.m_mon <= 5
        game, emap = embed_glv(sys_)
        tr = simulate_with_clock(game, emap.forward(x0), 5.0)
        direct = integrate_adaptive(sys_.field, x0, 5.0, 1e-12, 1e-12, t_eval=tr.times)
        worst = max(worst, float(np.abs(tr.map(emap.inverse).states - direct.states).max()))
    dt = time.perf_counter() - t0
    ok = worst < 1e-4 and dt < 60
    report("2 orbit equivalence", ok, f"sup deviation={worst:.2e} over 20 systems {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 3

def test_pushforward_proportionality(report):
    rng = np.random.default_rng(303)
    systems = [random_glv(rng) for _ in range(10)] + [logistic_glv(), poly_to_glv(lorenz_field())]
    worst_res, worst_fd, min_factor = 0.0, 0.0, np.inf
    for sys_ in systems:
        game, emap = embed_glv(sys_)
        lo, hi = (0.3, 3.0) if sys_.n < 3 or sys_.m_mon < 9 else (1.0, 20.0)
        for x in rng.uniform(lo, hi, size=(1000, sys_.n)):
            chk = pushforward_residual(sys_, emap, game, x)
            worst_res = max(worst_res, chk.residual)
            p = emap.forward(x)
            w = game.field(p)
            dfv = p[-1] * (fd_jacobian(emap.forward, x) @ glv_field(sys_, x))
            scale = max(np.abs(w).max(), np.abs(dfv).max(), 1e-300)
            worst_fd = max(worst_fd, float(np.abs(w - dfv).max() / scale))
            if not chk.fixed_point:
                min_factor = min(min_factor, chk.factor)
    ok = worst_res <= 1e-7 and worst_fd <= 1e-7 and min_factor > 0
    report("3 pushforward", ok,
           f"residual={worst_res:.2e} fd-oracle rel={worst_fd:.2e} min factor={min_factor:.2e}")
    assert ok


# ---------------------------------------------------------------- 4

def test_radial_identity(report):
    rng = np.random.default_rng(404)
    worst_r, worst_res = 0.0, 0.0
    for name, base in SPHERE_FIELDS.items():
        ext = extend_to_ambient(base)
        n = ext.n
        te = np.linspace(0.0, 5.0, 51)
        for r0 in np.concatenate([[0.25, 4.0], rng.uniform(0.25, 4.0, 8)]):
            d = rng.normal(size=n)
            x0 = math.sqrt(r0) * d / np.linalg.norm(d)
            tr = integrate_adaptive(ext, x0, 5.0, 1e-11, 1e-12, t_eval=te)
            worst_r = max(worst_r, float(np.abs((tr.states**2).sum(axis=1) - logistic_radius(r0, te)).max()))
        # points with |x|^2 in [0, 4], the same range as the starts
        pts = rng.normal(size=(10_000 // len(SPHERE_FIELDS) + 1, n))
        pts *= (2.0 * rng.uniform(0, 1, size=(len(pts), 1)) ** (1 / n)) / np.linalg.norm(pts, axis=1, keepdims=True)
        worst_res = max(worst_res, max(radial_residual(ext, x) for x in pts))
    ok = worst_r <= 1e-6 and worst_res <= 1e-10
    report("4 radial identity", ok, f"radius err={worst_r:.2e} radial residual={worst_res:.2e}")
    assert ok


# ---------------------------------------------------------------- 5

def test_translation_positivity(report):
    rng = np.random.default_rng(505)
    worst_min, details = np.inf, []
    for name, base in SPHERE_FIELDS.items():
        params = self_consistent_sigma(base)
        assert cubic_margin_exact(params.sigma, params.B_bound) > 0
        Y = translate_field(extend_to_ambient(base), params)
        s = params.sigma
        for _ in range(100 // len(SPHERE_FIELDS) + 1):
            y0 = rng.uniform(0.0, 2 * s, size=base.n)
            y0 = np.maximum(y0, 1e-3)  # open orthant
            tr = integrate_adaptive(Y, y0, 20.0, 1e-10, 1e-12)
            worst_min = min(worst_min, float(tr.states.min()))
        details.append(f"{name} sigma={s:.3f}")
    ok = worst_min > 0
    report("5 translation positivity", ok, f"min coord={worst_min:.3e} ({', '.join(details)})")
    assert ok


# ---------------------------------------------------------------- 6

def test_local_error_bound(report):
    rng = np.random.default_rng(606)
    t0 = time.perf_counter()
    violations = 0
    for _ in range(10_000):
        m = int(rng.integers(2, 11))
        g = normalize_game(random_game(rng, m))
        eta = float(math.exp(rng.uniform(math.log(1e-4), math.log(0.5))))
        if measure_local_error(g, rng.dirichlet(np.ones(m)), eta) > local_error_bound(eta):
            violations += 1
    etas = np.geomspace(1e-4, 1e-2, 9)
    slopes = []
    for _ in range(10):
        m = int(rng.integers(2, 11))
        g, x = normalize_game(random_game(rng, m)), rng.dirichlet(np.ones(m))
        errs = [measure_local_error(g, x, e) for e in etas]
        slopes.append(np.polyfit(np.log(etas), np.log(errs), 1)[0])
    lo, hi = min(slopes), max(slopes)
    dt = time.perf_counter() - t0
    ok = violations == 0 and 1.8 <= lo and hi <= 2.2
    report("6 local error", ok, f"violations={violations}/10000 slope range=[{lo:.3f}, {hi:.3f}] {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 7

def test_global_error_bound(report):
    rng = np.random.default_rng(707)
    t0 = time.perf_counter()
    failures, worst_ratio, step1 = 0, 0.0, 0.0
    for _ in range(100):
        m = int(rng.integers(2, 11))
        g = normalize_game(random_game(rng, m))
        eta = float(rng.uniform(1e-3, 0.05))
        rep = measure_global_error(g, rng.dirichlet(np.ones(m)), eta, 1000)
        failures += not rep.global_ok
        worst_ratio = max(worst_ratio, max(a / b for a, b in zip(rep.measured_global[1:], rep.global_bounds[1:])))
        step1 = max(step1, abs(rep.global_bounds[1] - local_error_bound(eta)))
    dt = time.perf_counter() - t0
    ok = failures == 0 and step1 == 0.0
    report("7 global error", ok,
           f"configs over bound={failures}/100 max measured/bound={worst_ratio:.3e} "
           f"|step-1 bound - local|={step1:.1e} {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 8

def test_step_size_selection(report):
    rng = np.random.default_rng(808)
    cases = [(1.0, 1.0)] + [(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 3))) for _ in range(9)]
    resat, mono = True, True
    for L, T in cases:
        floor = 2 * math.expm1(T * L) / L  # small-step limit of the bound over horizon T
        prev = 0.0
        for eps in np.geomspace(floor * 1.05, floor * 50, 20):
            eta = select_step_size(L, T, float(eps))
            resat &= global_error_bound(eta, L, math.ceil(T / eta - 1e-12)) <= eps
            mono &= eta >= prev
            prev = eta
    ok = bool(resat and mono)
    report("8 step-size selection", ok, f"re-satisfied={resat} monotone={mono} over {len(cases)} (L, T) x 20 eps")
    assert ok


# ---------------------------------------------------------------- 9

def test_monomial_count(report):
    C = pascal_counts(18, 58)
    n_mon = count_monomials(18, 58)
    ok = n_mon == C[18][58] and game_size_bound(18, 58) == math.comb(76, 18) + 1
    report("9 monomial count", ok, f"count={n_mon} bound={game_size_bound(18, 58)}")
    assert ok


# ---------------------------------------------------------------- 10

HAND_MACHINES = [unary_incrementer, busy_beaver_3, immediate_halt, cycler, decimal_incrementer]
HAND_TAPES = ["0", "[1]11", "12[3]45", "9[9]9", "1111[1]"]


def _random_machine(rng):
    r = int(rng.integers(2, 6))
    delta = {(q, s): (int(rng.integers(1, r + 1)), int(rng.integers(0, 10)), int(rng.integers(-1, 2)))
             for q in range(1, r) for s in range(10)}
    return TuringMachine(r, 1, r, delta)


def _random_config(rng, r):
    k0 = int(rng.integers(0, 8))
    return TapeConfig(int(rng.integers(1, r + 1)), tuple(int(v) for v in rng.integers(0, 10, size=2 * k0 + 1)))


def test_turing_conjugacy(report):
    rng = np.random.default_rng(1010)
    t0 = time.perf_counter()
    pair_fail = 0
    for _ in range(10_000):
        T = _random_machine(rng)
        c = _random_config(rng, T.r)
        got, on = encoded_step(T, encode(c))
        pair_fail += not (on and got == encode(tm_step(T, c)))

    trace_fail, trace_steps = 0, 0
    for make in HAND_MACHINES:
        T, rules = make()
        for tape in HAND_TAPES:
            c = TapeConfig.from_string(tape, T.q0)
            halted, n, _, _ = dict_tm(rules, T.q0, T.q_halt, dict(c.nonblank()), 200)
            e = encode(c)
            for _ in range(n + 1 if halted else 200):  # whole run plus one absorbing step
                c = tm_step(T, c)
                e, on = encoded_step(T, e)
                trace_fail += not (on and e == encode(c))
                trace_steps += 1

    rt_fail = 0
    for _ in range(10_000):
        c = _random_config(rng, 5)
        e = encode(c)
        rt_fail += not (decode(e) == c and decode(e, k0=c.k0).cells == c.cells)

    reach_fail, reach_checks = 0, 0
    for make in HAND_MACHINES:
        T, rules = make()
        for tape in HAND_TAPES:
            c = TapeConfig.from_string(tape, T.q0)
            halted, n, dtape, head = dict_tm(rules, T.q0, T.q_halt, dict(c.nonblank()), 300)
            res = tm_run(T, c, 300)
            windows = [tuple(dtape.get(head + i, 0) for i in range(-k, k + 1)) for k in (0, 1, 3)]
            windows += [(0, 0, 0), (1, 1, 1), (1, 1, 0, 0, 0)]
            for w in windows:
                h = len(w) // 2
                expect = halted and tuple(dtape.get(head + i, 0) for i in range(-h, h + 1)) == w
                rep = tm_reach_check(T, c, w, 0.25, 300)
                reach_checks += 1
                reach_fail += rep.reached != expect or (expect and rep.hit_time != n) or res.halted != halted
    dt = time.perf_counter() - t0
    ok = pair_fail == rt_fail == trace_fail == reach_fail == 0
    report("10 turing conjugacy", ok,
           f"pair failures={pair_fail}/10000 trace failures={trace_fail}/{trace_steps} "
           f"round-trip failures={rt_fail}/10000 reach mismatches={reach_fail}/{reach_checks} {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 11

def test_lorenz_regime(report):
    t0 = time.perf_counter()
    game, emap = embed_glv(poly_to_glv(shifted_lorenz()))
    shift = 30.0
    start = np.asarray(LORENZ_START, dtype=float)
    p0 = emap.forward(start + shift)
    rd = simulate_with_clock(game, p0, 2.0, 1e-10, 1e-12)
    pulled = rd.map(emap.inverse).states - shift
    direct = integrate_adaptive(lorenz_field(), start, 2.0, 1e-12, 1e-12, t_eval=rd.times).states
    rel = float(np.abs(pulled - direct).max() / np.abs(direct).max())
    mwu = simulate_mwu(game, p0, 1e-2, 10_000, check_normalized=False)
    sum_err = float(np.abs(mwu.states.sum(axis=1) - 1).max())
    mn = float(mwu.states.min())
    dt = time.perf_counter() - t0
    ok = rel <= 0.05 and mn > 0 and sum_err <= 1e-9 and dt < 120
    report("11 lorenz regime", ok,
           f"m={game.m} pullback rel dev={rel:.2e} mwu min={mn:.2e} |sum-1|={sum_err:.1e} {dt:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

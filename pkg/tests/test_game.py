import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from replicator_tc.errors import RejectedInput
from replicator_tc.game import (
    MatrixGame,
    logit,
    replicator_field,
    replicator_from_payoffs,
    simulate_replicator,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def game_and_point(draw, m_max=6):
    m = draw(st.integers(2, m_max))
    A = draw(arrays(float, (m, m), elements=finite))
    w = draw(arrays(float, m, elements=st.floats(0.01, 1.0)))
    return MatrixGame(A), w / w.sum()


def test_field_examples():
    assert np.allclose(replicator_field(MatrixGame([[0, 1], [1, 0]]), [0.5, 0.5]), 0.0)
    assert np.all(replicator_field(MatrixGame(np.zeros((3, 3))), [0.2, 0.3, 0.5]) == 0)
    assert np.allclose(replicator_field(MatrixGame([[0, 1], [0, 0]]), [0.5, 0.5]), [0.125, -0.125])


def test_field_rejects_non_simplex_point():
    with pytest.raises(RejectedInput):
        replicator_field(MatrixGame(np.eye(2)), [0.6, 0.6])


@pytest.mark.parametrize("A", [[[1, 2, 3]], [[np.inf, 0], [0, 0]], []])
def test_bad_matrices_rejected(A):
    with pytest.raises(RejectedInput):
        MatrixGame(A)


def test_logit_examples():
    assert np.allclose(logit([0.0, 0.0]), [0.5, 0.5])
    assert np.allclose(logit([math.log(2), 0.0]), [2 / 3, 1 / 3])
    assert np.allclose(logit([1000.0, 999.0]), logit([1.0, 0.0]))


def test_simulate_constant_cases():
    tr = simulate_replicator(MatrixGame(np.zeros((2, 2))), [0.3, 0.7], 5.0)
    assert np.all(tr.states == [0.3, 0.7])
    tr = simulate_replicator(MatrixGame([[0, 1], [1, 0]]), [0.5, 0.5], 5.0)
    assert np.abs(tr.states - 0.5).max() < 1e-12


def test_simulate_logistic_closed_form():
    # A = [[1,0],[0,0]] gives x1' = x1^2 (1 - x1), whose solution satisfies
    # F(x1(t)) = F(x1(0)) + t with F(x) = ln(x / (1 - x)) - 1/x
    def F(x):
        return np.log(x / (1 - x)) - 1 / x

    def solve(target):
        lo, hi = 0.5, 1.0 - 1e-15  # F is increasing on (0, 1)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if F(mid) < target else (lo, mid)
        return 0.5 * (lo + hi)

    te = np.linspace(0, 20, 41)
    tr = simulate_replicator(MatrixGame([[1, 0], [0, 0]]), [0.5, 0.5], 20.0, t_eval=te)
    x1 = tr.states[:, 0]
    exact = np.array([solve(F(0.5) + t) for t in te])
    assert np.abs(x1 - exact).max() < 1e-8
    assert np.all(np.diff(x1) > 0) and x1[-1] > 0.9


def test_simulate_rejects_face_start_and_size_mismatch():
    g = MatrixGame(np.eye(2))
    with pytest.raises(RejectedInput):
        simulate_replicator(g, [1.0, 0.0], 1.0)
    with pytest.raises(RejectedInput):
        simulate_replicator(g, [0.2, 0.3, 0.5], 1.0)


def test_payoff_form_examples():
    tr = replicator_from_payoffs(MatrixGame(np.zeros((2, 2))), [0.0, 0.0], 3.0)
    assert np.allclose(tr.states, 0.5)
    tr = replicator_from_payoffs(MatrixGame([[1, -1], [0, 2]]), [math.log(2), 0.0], 1.0)
    assert np.allclose(tr.states[0], [2 / 3, 1 / 3])


def test_json_and_csv_round_trip():
    g = MatrixGame([[0.1, -2.0], [3.5, 0.0]])
    assert np.array_equal(MatrixGame.from_json(g.to_json()).A, g.A)
    assert np.array_equal(MatrixGame.from_csv(g.to_csv()).A, g.A)
    with pytest.raises(RejectedInput):
        MatrixGame.from_json({"m": 3, "A": g.A.tolist()})


def test_matrix_is_read_only():
    g = MatrixGame(np.eye(2))
    with pytest.raises(ValueError):
        g.A[0, 0] = 5.0


@settings(max_examples=200, deadline=None)
@given(game_and_point())
def test_velocity_sums_to_zero(gp):
    g, x = gp
    assert abs(replicator_field(g, x).sum()) <= 1e-12 * max(1.0, np.abs(g.A).max())


@settings(max_examples=100, deadline=None)
@given(game_and_point(), st.integers(0, 5), finite)
def test_column_shift_invariance(gp, col, c):
    g, x = gp
    col %= g.m
    A = g.A.copy()
    A[:, col] += c
    assert np.allclose(replicator_field(MatrixGame(A), x), replicator_field(g, x), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 4, elements=finite), finite)
def test_logit_shift_invariance(y, c):
    assert np.allclose(logit(y + c), logit(y), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(game_and_point(m_max=4))
def test_payoff_and_simplex_forms_agree(gp):
    g, x = gp
    g = MatrixGame(g.A / max(1.0, np.abs(g.A).max()))
    te = np.linspace(0, 2.0, 9)
    a = simulate_replicator(g, x, 2.0, 1e-11, 1e-13, t_eval=te)
    b = replicator_from_payoffs(g, np.log(x), 2.0, 1e-11, 1e-13, t_eval=te)
    assert np.abs(a.states - b.states).max() < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.5, 2.0))
def test_field_conserves_total_mass_off_simplex(seed, scale):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 8))
    g = MatrixGame(rng.uniform(-1, 1, size=(m, m)))
    x = scale * rng.dirichlet(np.ones(m))
    assert abs(g.field(x).sum()) <= 1e-14


def test_negative_payoff_game_stays_on_simplex_long_run():
    g = MatrixGame([[-0.944, -0.707], [-0.732, -1.0]])
    tr = simulate_replicator(g, [0.357, 0.643], 45.0, 1e-12, 1e-12)
    assert np.abs(tr.states.sum(axis=1) - 1).max() <= 1e-12
    # interior equilibrium of the 2x2 game (equal payoffs) is stable; approach is slow
    x1 = (g.A[1, 1] - g.A[0, 1]) / (g.A[0, 0] - g.A[1, 0] - g.A[0, 1] + g.A[1, 1])
    assert abs(tr.final[0] - x1) < 0.01 * abs(0.357 - x1)

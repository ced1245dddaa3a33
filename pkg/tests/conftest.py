import numpy as np
import pytest

from rsgame.model import make_model


def uncontrolled_two_state():
    """Closed chain P = [[.5,.5],[.5,.5]], costs (0, log 2): growth log 1.5."""
    P = np.full((1, 1, 2), 0.5)
    return make_model(2, [[0], [0]], [[0], [0]], [P.copy(), P.copy()],
                      [np.zeros((1, 1)), np.full((1, 1), np.log(2.0))], i0=0)


def scalar_self_loop(p=0.8, c=0.35):
    return make_model(1, [[0]], [[0]], [np.full((1, 1, 1), p)],
                      [np.full((1, 1), c)], i0=0)


def one_state_two_action():
    """Player 1 picks between per-step costs 1 and 2; value 1."""
    return make_model(1, [[0, 1]], [[0]], [np.ones((2, 1, 1))],
                      [np.array([[1.0], [2.0]])], i0=0)


def pennies_layer_model():
    """State 0 carries a matching-pennies cost layer on an action-blind
    uniform kernel; state 1 is uncontrolled with zero cost."""
    P0 = np.empty((2, 2, 2))
    P0[..., 0] = 0.5
    P0[..., 1] = 0.5
    C0 = np.array([[1.0, 0.0], [0.0, 1.0]])
    P1 = np.full((1, 1, 2), 0.5)
    return make_model(2, [[0, 1], [0]], [[0, 1], [0]], [P0, P1],
                      [C0, np.zeros((1, 1))], i0=0)


def random_closed_model(rng, n=4, mu=2, mv=2, cost_scale=1.0):
    transition = []
    cost = []
    for i in range(n):
        P = rng.uniform(0.05, 1.0, (mu, mv, n))
        P /= P.sum(axis=2, keepdims=True)
        transition.append(P)
        cost.append(rng.uniform(0.0, cost_scale, (mu, mv)))
    return make_model(n, [list(range(mu))] * n, [list(range(mv))] * n,
                      transition, cost, i0=0)


def random_uncontrolled_chain(rng, n):
    transition = []
    cost = []
    for i in range(n):
        row = rng.uniform(0.05, 1.0, n)
        row /= row.sum()
        transition.append(row.reshape(1, 1, n))
        cost.append(rng.uniform(0.0, 0.5, (1, 1)))
    return make_model(n, [[0]] * n, [[0]] * n, transition, cost, i0=0)


@pytest.fixture
def two_state():
    return uncontrolled_two_state()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

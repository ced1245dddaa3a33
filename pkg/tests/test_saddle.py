import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (bilinear_2x2_mixed, lower_value_exact, lower_value_grid,
                     simplex_grid)
from rsgame._util import NEG_INF
from rsgame.model import make_model
from rsgame.saddle import (LocalSaddle, best_response_pure_min_core,
                           local_payoff_core, solve_saddle_core)


def rand_instance(rng, mu, mv, cost_lo=0.0, cost_hi=2.0, l_scale=1.5):
    C = rng.uniform(cost_lo, cost_hi, (mu, mv))
    L = rng.normal(0.0, l_scale, (mu, mv))
    return C, L


# ---------------------------------------------------------------------------
# local payoff


def test_payoff_singleton_identity():
    # psi = 1 on a full row: the log mass term vanishes and only c remains
    C = np.array([[0.7]])
    L = np.array([[0.0]])
    assert local_payoff_core(C, L, np.ones(1), np.ones(1)) == pytest.approx(0.7, abs=1e-15)


def test_payoff_constant_psi_reduces_to_cost(rng):
    C, _ = rand_instance(rng, 3, 2)
    L = np.zeros((3, 2))  # psi = 1 against stochastic rows
    mu = rng.dirichlet(np.ones(3))
    nu = rng.dirichlet(np.ones(2))
    assert local_payoff_core(C, L, mu, nu) == pytest.approx(mu @ C @ nu, abs=1e-12)


def test_payoff_uniform_mix_bilinear_half():
    C = np.array([[0.0, 1.0], [1.0, 0.0]])
    L = np.zeros((2, 2))
    val = local_payoff_core(C, L, np.full(2, 0.5), np.full(2, 0.5))
    assert val == pytest.approx(0.5, abs=1e-12)


def test_payoff_empty_support_sentinel():
    C = np.zeros((2, 2))
    L = np.full((2, 2), NEG_INF)
    assert local_payoff_core(C, L, np.full(2, 0.5), np.full(2, 0.5)) == NEG_INF


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), t=st.floats(0.0, 1.0))
def test_payoff_bilinearity_of_both_pieces(seed, t):
    """The exponent's cost term and the inner mass are linear in mu."""
    rng = np.random.default_rng(seed)
    C, L = rand_instance(rng, 3, 3)
    nu = rng.dirichlet(np.ones(3))
    mu1 = rng.dirichlet(np.ones(3))
    mu2 = rng.dirichlet(np.ones(3))
    mix = t * mu1 + (1 - t) * mu2
    Q = np.exp(L)

    def pieces(mu):
        return mu @ C @ nu, mu @ Q @ nu

    c_mix, q_mix = pieces(mix)
    c1, q1 = pieces(mu1)
    c2, q2 = pieces(mu2)
    assert c_mix == pytest.approx(t * c1 + (1 - t) * c2, abs=1e-12)
    assert q_mix == pytest.approx(t * q1 + (1 - t) * q2, rel=1e-12)
    # and the composite payoff is exactly their composition
    val = local_payoff_core(C, L, mix, nu)
    assert val == pytest.approx(c_mix + np.log(q_mix), abs=1e-12)


# ---------------------------------------------------------------------------
# pure best response


def test_best_response_prefers_cheaper_action():
    C = np.array([[5.0], [1.0]])
    L = np.zeros((2, 1))
    u, val = best_response_pure_min_core(C, L, np.ones(1))
    assert u == 1
    assert val == pytest.approx(1.0)


def test_best_response_tie_breaks_lowest_index():
    C = np.ones((3, 2))
    L = np.zeros((3, 2))
    u, _ = best_response_pure_min_core(C, L, np.full(2, 0.5))
    assert u == 0


def test_no_mixed_mu_beats_best_pure(rng):
    """Simplex-grid check of the vertex-minimizer property."""
    grid = simplex_grid(3, 19)  # 210 mixtures including the vertices
    for _ in range(10):
        C, L = rand_instance(rng, 3, 3)
        nu = rng.dirichlet(np.ones(3))
        _, pure_val = best_response_pure_min_core(C, L, nu)
        mixed_best = min(local_payoff_core(C, L, m, nu) for m in grid)
        assert mixed_best >= pure_val - 1e-10


# ---------------------------------------------------------------------------
# saddle solver


def test_saddle_singleton_actions():
    C = np.array([[0.3]])
    L = np.array([[np.log(0.8)]])
    s = solve_saddle_core(C, L)
    assert s.log_value == pytest.approx(0.3 + np.log(0.8), abs=1e-14)
    assert s.gap == 0.0
    assert s.mu.tolist() == [1.0]
    assert s.nu.tolist() == [1.0]


def test_saddle_matching_pennies_constant_psi():
    """With psi = 1 the game is the bilinear matrix game on the costs."""
    C = np.array([[1.0, 0.0], [0.0, 1.0]])
    L = np.zeros((2, 2))
    p, q, value = bilinear_2x2_mixed(C)
    s = solve_saddle_core(C, L, tol=1e-8)
    assert s.log_value == pytest.approx(value, abs=1e-10)
    assert s.mu == pytest.approx(p, abs=1e-9)
    assert s.nu == pytest.approx(q, abs=1e-9)
    assert s.order_gap <= 1e-9


def test_saddle_random_2x2_matches_grid_oracle(rng):
    for _ in range(8):
        C, L = rand_instance(rng, 2, 2)
        s = solve_saddle_core(C, L, tol=1e-8)
        assert s.log_value == pytest.approx(lower_value_exact(C, L), abs=1e-9)
        assert s.log_value == pytest.approx(lower_value_grid(C, L, 300), abs=1e-6)


def test_saddle_gap_certificate(rng):
    """The certificate is nonnegative, below tolerance, and truthful: no
    grid point ever beats the returned value."""
    for trial in range(30):
        mu = int(rng.integers(1, 4))
        mv = int(rng.integers(1, 4))
        C, L = rand_instance(rng, mu, mv)
        s = solve_saddle_core(C, L, tol=1e-8)
        assert 0.0 <= s.gap <= 1e-8
        probe = simplex_grid(mv, 40)
        best = max(
            min(local_payoff_core(C, L, np.eye(mu)[u], nu) for u in range(mu))
            for nu in probe)
        assert best <= s.log_value + s.gap + 1e-12


def test_saddle_monotone_in_psi(rng):
    for _ in range(25):
        mu = int(rng.integers(1, 4))
        mv = int(rng.integers(1, 4))
        C, L1 = rand_instance(rng, mu, mv)
        L2 = L1 + rng.uniform(0.0, 1.0, (mu, mv))  # psi grows entrywise
        v1 = solve_saddle_core(C, L1, tol=1e-10).log_value
        v2 = solve_saddle_core(C, L2, tol=1e-10).log_value
        assert v1 <= v2 + 1e-10


def test_saddle_one_homogeneous(rng):
    for _ in range(25):
        mu = int(rng.integers(1, 4))
        mv = int(rng.integers(1, 4))
        C, L = rand_instance(rng, mu, mv)
        lam = float(rng.uniform(0.1, 10.0))
        v = solve_saddle_core(C, L, tol=1e-10).log_value
        v_scaled = solve_saddle_core(C, L + np.log(lam), tol=1e-10).log_value
        assert v_scaled == pytest.approx(v + np.log(lam), abs=1e-10)


def test_saddle_dead_row_collapses_value():
    # player 1 owns an action whose one-step mass vanishes entirely
    C = np.array([[0.5, 0.5], [1.0, 1.0]])
    L = np.array([[0.0, 0.0], [NEG_INF, NEG_INF]])
    s = solve_saddle_core(C, L)
    assert s.log_value == NEG_INF
    assert s.empty_support
    assert s.mu.tolist() == [0.0, 1.0]


def test_saddle_order_gap_reported_not_gated(rng):
    """Instances without a mixed saddle still solve with a certified lower
    value; the order discrepancy lands in order_gap."""
    C = np.array([[0.3909730191640082, 1.3590540184179156],
                  [0.4281845786734404, 0.19831394119762868]])
    L = np.array([[-1.9838116999375184, -0.7292911960485703],
                  [0.6303400642118786, -0.15359505991664457]])
    s = solve_saddle_core(C, L, tol=1e-8)
    assert s.gap <= 1e-8
    assert s.log_value == pytest.approx(lower_value_exact(C, L), abs=1e-9)
    assert s.order_gap > 1e-3  # measured two-order discrepancy ~ 0.106


def test_solver_never_fails_on_random_sweep(rng):
    for _ in range(60):
        mu = int(rng.integers(1, 5))
        mv = int(rng.integers(1, 5))
        C, L = rand_instance(rng, mu, mv)
        s = solve_saddle_core(C, L, tol=1e-8)
        assert isinstance(s, LocalSaddle)
        assert np.isfinite(s.log_value)


def test_model_level_wrappers(two_state):
    from rsgame.saddle import best_response_pure_min, local_payoff, solve_saddle
    log_psi = np.zeros(2)
    val = local_payoff(two_state, 1, log_psi, [1.0], [1.0])
    assert val == pytest.approx(np.log(2.0), abs=1e-12)
    u, bv = best_response_pure_min(two_state, 1, log_psi, [1.0])
    assert (u, bv) == (0, pytest.approx(np.log(2.0), abs=1e-12))
    s = solve_saddle(two_state, 0, log_psi)
    assert s.log_value == pytest.approx(0.0, abs=1e-12)

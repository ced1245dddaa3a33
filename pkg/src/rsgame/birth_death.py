"""Controlled birth-and-death model on a truncated window.

Player 1 buys extra death pressure (action u), player 2 buys birth
pressure (action v), both from intervals discretized to finite grids.
The kernel has exponentially shrinking sensitivity in the population
size, a heavy drift back to zero, and a per-capita running cost; the
weight function exp(i^2/6 + 1) certifies stability with rate (i+3)/6.

Out-of-window probability mass (the tail of the state-0 row and the
upward move of the top state) is folded back into state 0 so rows stay
exactly stochastic; the folded mass is recorded on the build report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import logsumexp
from .model import GameModel, LyapunovData, make_model

P_HAT_LIMIT = 1.0 / 6.0


class WindowTooSmall(ValueError):
    pass


class ParamError(ValueError):
    pass


def linear_cost(coef: float = 1.0):
    """Action-proportional cost family: (i, a) -> coef * a."""
    return lambda i, a: coef * a


def affine_state_cost(coef: float = 1.0, slope: float = 0.0):
    """Action cost with population-dependent weight: (i, a) -> a*(coef + slope*i)."""
    return lambda i, a: a * (coef + slope * i)


@dataclass
class BirthDeathParams:
    p_hat: float = 0.1
    delta: float = 0.1
    L1: float = 1.0
    L2: float = 1.0
    grid_u: int = 5
    grid_v: int = 5
    window: int = 60
    cost_c1: object = None  # callable (i, u) -> float; default linear in u
    cost_c2: object = None  # callable (i, v) -> float; default linear in v
    allow_p_hat_violation: bool = False

    def __post_init__(self):
        if self.delta <= 0 or self.delta > min(self.L1, self.L2):
            raise ParamError(f"need 0 < delta <= min(L1, L2), got delta={self.delta}")
        if self.p_hat <= 0:
            raise ParamError("p_hat must be positive")
        if self.p_hat >= P_HAT_LIMIT and not self.allow_p_hat_violation:
            raise ParamError(
                f"p_hat={self.p_hat} violates p_hat < 1/6; pass allow_p_hat_violation=True "
                "to build anyway (stability checks will fail)")
        if self.grid_u < 1 or self.grid_v < 1:
            raise ParamError("action grids need at least one point")
        if self.window < 4:
            raise WindowTooSmall("window must cover states 0..3 for the state-1 row")
        if self.cost_c1 is None:
            self.cost_c1 = linear_cost(1.0)
        if self.cost_c2 is None:
            self.cost_c2 = linear_cost(1.0)


@dataclass
class BuildInfo:
    fold_mass_state0: float
    fold_mass_top: float
    negative_cost_entries: int
    min_cost: float


_LAST_BUILD_INFO: dict = {}


def action_grids(params: BirthDeathParams):
    U = np.linspace(params.delta, params.L1, params.grid_u)
    V = np.linspace(params.delta, params.L2, params.grid_v)
    return U, V


def log_weight(i) -> np.ndarray:
    i = np.asarray(i, dtype=float)
    return i * i / 6.0 + 1.0


def rate_ell(i) -> np.ndarray:
    i = np.asarray(i, dtype=float)
    return (i + 3.0) / 6.0


def exception_set(window: int) -> np.ndarray:
    """M = {i : 4 - (i+3)/6 > 0}, intersected with the window."""
    i = np.arange(window)
    return i[4.0 - (i + 3.0) / 6.0 > 0.0]


def drift_constant() -> float:
    """max of the two constants in the stability estimate (exact sums)."""
    j = np.arange(1, 400)
    series = float(np.exp(-2.0) * np.sum(np.exp(-j * j / 6.0) - np.exp(-j * j / 3.0)) + np.e)
    m = exception_set(10**6)
    peak = float(np.exp(log_weight(m[-1]) + 4.0))
    return max(peak, series)


def build_birth_death(params: BirthDeathParams) -> GameModel:
    """Window-truncated model with exactly stochastic rows.

    Post-build, every row sums to one within 1e-12 (asserted). Build
    details (fold masses, cost-sign findings) are kept on the module-level
    last-build record and surfaced by the CLI.
    """
    n = params.window
    U, V = action_grids(params)
    mu, mv = len(U), len(V)
    denom = 2.0 * (params.L1 + params.L2)

    transition = []
    cost = []

    # state 0: action-independent row with super-gaussian tail
    j = np.arange(1, n)
    tail_in = np.exp(-j * j / 3.0 - 3.0)
    jj = np.arange(n, n + 4000)
    fold0 = float(np.sum(np.exp(-jj * jj / 3.0 - 3.0)))
    row0 = np.zeros(n)
    row0[1:] = tail_in
    row0[0] = 1.0 - tail_in.sum()  # includes the folded tail by construction
    P0 = np.broadcast_to(row0, (mu, mv, n)).copy()
    transition.append(P0)

    # state 1: birth pressure spreads mass over 1..3
    P1 = np.zeros((mu, mv, n))
    for b, v in enumerate(V):
        m = np.exp(-2.0) * v / denom
        P1[:, b, 0] = 1.0 - 3.0 * m
        P1[:, b, 1] = m
        P1[:, b, 2] = m
        P1[:, b, 3] = m
    transition.append(P1)

    # states i >= 2: death pressure down, birth pressure up, bulk resets to 0
    fold_top = 0.0
    for i in range(2, n):
        P = np.zeros((mu, mv, n))
        for a, u in enumerate(U):
            for b, v in enumerate(V):
                down = u * np.exp(-float(i)) / denom
                up = v * np.exp(-2.0 * float(i)) / denom
                P[a, b, i - 1] = down
                P[a, b, i] = down + up
                reset = 1.0 - 2.0 * (down + up)
                if i + 1 < n:
                    P[a, b, i + 1] = up
                else:
                    reset += up  # top row: upward move folded into the reset
                    fold_top = max(fold_top, up)
                P[a, b, 0] += reset
        transition.append(P)

    neg = 0
    cmin = np.inf
    for i in range(n):
        C = np.empty((mu, mv))
        for a, u in enumerate(U):
            for b, v in enumerate(V):
                C[a, b] = params.p_hat * i + params.cost_c1(i, u) - params.cost_c2(i, v)
        neg += int((C < 0).sum())
        cmin = min(cmin, float(C.min()))
        cost.append(C)

    lyap = LyapunovData(
        log_W=log_weight(np.arange(n)),
        C=drift_constant(),
        K=exception_set(n),
        ell=rate_ell(np.arange(n)),
    )
    model = make_model(
        n_states=n,
        actions_p1=[U.tolist()] * n,
        actions_p2=[V.tolist()] * n,
        transition=transition,
        cost=cost,
        theta=1.0,
        i0=0,
        lyapunov=lyap,
    )
    for i in range(n):
        sums = model.row_sums(i)
        assert np.all(np.abs(sums - 1.0) <= 1e-12), f"row {i} not stochastic: {sums}"
    _LAST_BUILD_INFO["info"] = BuildInfo(
        fold_mass_state0=fold0,
        fold_mass_top=fold_top,
        negative_cost_entries=neg,
        min_cost=cmin,
    )
    return model


def last_build_info() -> BuildInfo | None:
    return _LAST_BUILD_INFO.get("info")


@dataclass
class StabilityReport:
    passed: bool
    drift_passed: bool
    worst_slack: float
    worst_state: int
    state0_vs_C: float
    norm_like: dict
    M: list
    slack: list

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "drift_passed": self.drift_passed,
            "worst_slack": float(self.worst_slack),
            "worst_state": self.worst_state,
            "state0_vs_C": float(self.state0_vs_C),
            "norm_like": self.norm_like,
            "M": [int(m) for m in self.M],
            "slack": [float(s) for s in self.slack],
        }


def verify_stability_estimates(params: BirthDeathParams, i_max: int = 200) -> StabilityReport:
    """Numerical check of the stability estimates for states 0..i_max.

    Verifies the drift inequality sum_j W(j) P(j|i,u,v) <= C 1_M(i)
    + e^{-ell(i)} W(i) exactly on the grid (log domain), the state-0
    variant against C alone, and the finite-window norm-like surrogate of
    ell(i) - max_{u,v} c(i,u,v): a nondecreasing tail with positive net
    growth beyond the last decrease.
    """
    window = max(params.window, i_max + 2)
    build = BirthDeathParams(**{**params.__dict__, "window": window})
    model = build_birth_death(build)
    ly = model.lyapunov
    logC = float(np.log(ly.C))
    in_M = np.zeros(window, dtype=bool)
    in_M[ly.K] = True

    slack = np.empty(i_max + 1)
    for i in range(i_max + 1):
        lt = model.log_transition(i)
        lhs = float(logsumexp(lt + ly.log_W[None, None, :], axis=2).max())
        decay = -ly.ell[i] + ly.log_W[i]
        rhs = float(np.logaddexp(logC, decay)) if in_M[i] else float(decay)
        slack[i] = rhs - lhs
    drift_ok = bool(slack.min() > 0.0)
    worst = int(slack.argmin())

    lt0 = model.log_transition(0)
    lhs0 = float(logsumexp(lt0 + ly.log_W[None, None, :], axis=2).max())
    state0_vs_C = logC - lhs0

    d = np.array([float(ly.ell[i] - model.cost[i].max()) for i in range(i_max + 1)])
    tail_start = i_max
    for m in range(i_max - 1, -1, -1):
        if d[m + 1] >= d[m] - 1e-12:
            tail_start = m
        else:
            break
    tail_ok = tail_start <= i_max - 1
    norm_like = {
        "surrogate": "nondecreasing tail (finite window)",
        "tail_start": int(tail_start),
        "net_growth": float(d[i_max] - d[tail_start]),
        "passed": bool(tail_ok),
    }

    return StabilityReport(
        passed=bool(drift_ok and tail_ok and state0_vs_C > 0.0),
        drift_passed=drift_ok,
        worst_slack=float(slack.min()),
        worst_state=worst,
        state0_vs_C=float(state0_vs_C),
        norm_like=norm_like,
        M=ly.K.tolist(),
        slack=slack.tolist(),
    )

"""Finite-domain problems under the absorbed-at-zero boundary convention.

A DirichletDomain restricts the game to a subset D of the window with
psi = 0 outside; one-step mass leaving D (including mass leaving the
window) contributes nothing. Provides the discounted-type source fixed
point and the principal eigenpair by nonlinear power iteration with a
Collatz-Wielandt bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import NEG_INF, logsumexp, map_ordered
from .model import GameModel
from .saddle import solve_saddle_core

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 5000
DAMP_AFTER = 200


class CollapseToZero(RuntimeError):
    """The iteration kills the reference state: value mass cannot persist."""


class NotStrictlyNegative(ValueError):
    pass


class NonnegativeSourceRequired(ValueError):
    pass


class NoConvergence(RuntimeError):
    def __init__(self, bracket, iterations):
        super().__init__(
            f"Collatz-Wielandt bracket {bracket} wider than tolerance after {iterations} sweeps")
        self.bracket = bracket
        self.iterations = iterations


@dataclass
class DirichletDomain:
    """Subset of window states with zero boundary values outside."""

    model: GameModel
    states: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(sorted(set(int(s) for s in np.atleast_1d(self.states))), dtype=int)
        if len(self.states) == 0:
            raise ValueError("domain must be nonempty")
        if self.states[0] < 0 or self.states[-1] >= self.model.n_states:
            raise ValueError("domain exceeds the model window")
        if self.model.i0 not in set(self.states.tolist()):
            raise ValueError(f"domain must contain the reference state {self.model.i0}")

    @staticmethod
    def prefix(model: GameModel, size: int) -> "DirichletDomain":
        return DirichletDomain(model, np.arange(int(size)))


@dataclass
class EigenPair:
    """Principal eigenvalue (log scale) and log eigenfunction on the window.

    log_psi is -inf outside the domain and on states the game kills;
    psi(i0) = 1 under the i0 normalization.
    """

    rho: float
    log_psi: np.ndarray
    domain: np.ndarray
    bracket: tuple
    iterations: int
    damping_events: int = 0
    normalization: str = "i0"
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rho": float(self.rho),
            "psi": [float(np.exp(x)) for x in self.log_psi],
            "domain": [int(s) for s in self.domain],
        }


def viable_states(domain: DirichletDomain) -> np.ndarray:
    """Largest subset on which the game value stays positive.

    A state survives when, for every player-1 action, some player-2 action
    keeps positive one-step mass inside the surviving set: otherwise the
    minimizer forces the multiplicative payoff to zero. The condition is
    monotone, so iterating the shrinkage converges.
    """
    model = domain.model
    alive = set(domain.states.tolist())
    changed = True
    while changed:
        changed = False
        idx = np.asarray(sorted(alive), dtype=int)
        for i in list(alive):
            P = model.transition[i][:, :, idx]  # (mU, mV, |alive|)
            mass = P.sum(axis=2)  # (mU, mV)
            if not np.all(mass.max(axis=1) > 0.0):
                alive.remove(i)
                changed = True
    return np.asarray(sorted(alive), dtype=int)


def apply_operator(model: GameModel, states, log_psi, tol_local=DEFAULT_TOL,
                   threads: int = 1):
    """One sweep of the dynamic-programming operator on the given states.

    Returns (log_G over the full window with -inf off `states`, saddles).
    """
    log_psi = np.asarray(log_psi, dtype=float)

    def one(i):
        lt = model.log_transition(i)
        L = logsumexp(lt + log_psi[None, None, :], axis=2)
        return solve_saddle_core(model.cost[i], np.asarray(L, dtype=float), tol=tol_local)

    saddles = map_ordered(one, states, threads=threads)
    log_G = np.full(model.n_states, NEG_INF)
    for i, s in zip(states, saddles):
        log_G[i] = s.log_value
    return log_G, saddles


def dirichlet_eigenpair(domain: DirichletDomain, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER,
                        tol_local: float = DEFAULT_TOL,
                        warm_start_log_psi=None,
                        threads: int = 1) -> EigenPair:
    """Principal eigenpair on the domain by nonlinear power iteration.

    Each sweep applies the saddle operator and renormalizes at i0. The
    operator is order preserving and 1-homogeneous, so the per-state
    ratios log G psi(i) - log psi(i) bracket the principal eigenvalue;
    convergence is declared on the bracket width, which bounds the
    eigenvalue error directly. After DAMP_AFTER undamped sweeps a half-step
    blend guards against cycling on periodic structures.
    """
    model = domain.model
    i0 = model.i0
    alive = viable_states(domain)
    if i0 not in set(alive.tolist()):
        raise CollapseToZero(f"reference state {i0} cannot sustain positive value")

    log_psi = np.full(model.n_states, NEG_INF)
    if warm_start_log_psi is not None:
        w = np.asarray(warm_start_log_psi, dtype=float)
        for i in alive:
            log_psi[i] = w[i] if np.isfinite(w[i]) else 0.0
        log_psi[alive] -= log_psi[i0]
    else:
        log_psi[alive] = 0.0

    damping = 0
    bracket = (NEG_INF, np.inf)
    for sweep in range(1, max_iter + 1):
        log_G, _ = apply_operator(model, alive, log_psi, tol_local=tol_local, threads=threads)
        if not np.isfinite(log_G[i0]):
            raise CollapseToZero(f"operator value vanished at the reference state {i0}")
        finite = np.isfinite(log_G[alive]) & np.isfinite(log_psi[alive])
        if not finite.all():
            # states killed along the way: restrict and restart the bracket
            alive = alive[finite]
            if i0 not in set(alive.tolist()):
                raise CollapseToZero(f"reference state {i0} died during iteration")
        ratios = log_G[alive] - log_psi[alive]
        bracket = (float(ratios.min()), float(ratios.max()))
        new_log_psi = np.full(model.n_states, NEG_INF)
        new_log_psi[alive] = log_G[alive] - log_G[i0]
        if bracket[1] - bracket[0] <= tol:
            rho = 0.5 * (bracket[0] + bracket[1])
            warnings = []
            if rho < -tol:
                warnings.append(f"negative eigenvalue {rho!r} on this domain")
            return EigenPair(
                rho=rho,
                log_psi=new_log_psi,
                domain=alive,
                bracket=bracket,
                iterations=sweep,
                damping_events=damping,
                warnings=warnings,
            )
        if sweep > DAMP_AFTER:
            blend = np.isfinite(new_log_psi) & np.isfinite(log_psi)
            new_log_psi[blend] = 0.5 * (new_log_psi[blend] + log_psi[blend])
            new_log_psi[blend] -= new_log_psi[i0]
            damping += 1
        log_psi = new_log_psi
    raise NoConvergence(bracket, max_iter)


def solve_source_problem(domain: DirichletDomain, cbar, g, tol: float = 1e-10,
                         max_iter: int = 100000) -> np.ndarray:
    """Unique fixed point of phi = saddle[e^{cbar} sum phi P] + g on the domain.

    cbar is a per-state list of (mU, mV) arrays and must be strictly
    negative on the domain, making the map a sup-norm contraction with
    factor alpha = max e^{cbar}. g must be nonnegative on the domain: the
    iterates then stay nonnegative, which keeps every local game in the
    sign-definite regime where pure minimizers are guaranteed (general
    signed iterates admit interior mixed minima and are out of scope).
    Iterates from zero until the step is below tol * (1 - alpha) / alpha.
    """
    model = domain.model
    states = domain.states
    cmax = max(float(np.asarray(cbar[i]).max()) for i in states)
    if cmax >= 0.0:
        raise NotStrictlyNegative(f"max cbar on domain is {cmax}; contraction needs < 0")
    g = np.asarray(g, dtype=float)
    if min(float(g[i]) for i in states) < 0.0:
        raise NonnegativeSourceRequired("source term must be nonnegative on the domain")
    alpha = float(np.exp(cmax))
    threshold = tol * (1.0 - alpha) / alpha

    phi = np.zeros(model.n_states)
    for _ in range(max_iter):
        with np.errstate(divide="ignore"):
            log_phi = np.log(phi)
        new = np.zeros(model.n_states)
        for i in states:
            lt = model.log_transition(i)
            L = logsumexp(lt + log_phi[None, None, :], axis=2)
            s = solve_saddle_core(np.asarray(cbar[i], dtype=float), np.asarray(L, dtype=float),
                                  tol=min(tol, 1e-10))
            new[i] = float(np.exp(s.log_value)) + g[i]
        step = float(np.max(np.abs(new - phi)))
        phi = new
        if step <= threshold:
            return phi
    raise NoConvergence((0.0, step), max_iter)

"""Truncation-ladder solver for the ergodic game on the full window.

Runs the Dirichlet eigenproblem on an increasing sequence of domains,
warm-starting each rung from the previous eigenfunction, stops when the
eigenvalue and eigenfunction stabilize, and certifies the result through
the equation residual. Also extracts the mini-max stationary selectors and
computes Lyapunov-based eigenvalue bounds when drift data is present.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ._util import NEG_INF
from .dirichlet import (DEFAULT_MAX_ITER, DEFAULT_TOL, DirichletDomain,
                        EigenPair, apply_operator, dirichlet_eigenpair)
from .model import GameModel, StationaryStrategy
from .saddle import NoConvergence

DEFAULT_TOL_OUTER = 1e-6
BOUNDARY_MASS_WARN = 1e-6


class NotUncontrolled(ValueError):
    pass


@dataclass
class LadderRung:
    index: int
    domain_size: int
    rho: float
    bracket_width: float
    iterations: int


@dataclass
class SolveReport:
    ladder: list
    rho_star: float
    log_psi_star: np.ndarray
    domain: np.ndarray
    selectors: tuple
    residual: float
    bounds: dict | None
    certified: bool
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        pi1, pi2 = self.selectors
        return {
            "rho_star": float(self.rho_star),
            "log_psi_star": [float(x) for x in self.log_psi_star],
            "psi_star": [float(np.exp(x)) for x in self.log_psi_star],
            "domain": [int(s) for s in self.domain],
            "ladder": [
                {"n": r.index, "domain_size": r.domain_size, "rho_n": float(r.rho),
                 "bracket_width": float(r.bracket_width), "iterations": r.iterations}
                for r in self.ladder
            ],
            "selectors": {
                "p1": [[float(w) for w in ws] for ws in pi1.weights],
                "p2": [[float(w) for w in ws] for ws in pi2.weights],
            },
            "residual": float(self.residual),
            "bounds": self.bounds,
            "certified": self.certified,
            "diagnostics": self.diagnostics,
            "warnings": self.warnings,
        }

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "domain_size", "rho_n", "bracket_width", "iterations"])
        for r in self.ladder:
            w.writerow([r.index, r.domain_size, repr(float(r.rho)),
                        repr(float(r.bracket_width)), r.iterations])
        return buf.getvalue()


def default_ladder(model: GameModel) -> list:
    """Doubling domain sizes capped by the window, always ending at it."""
    n = model.n_states
    size = max(4, model.i0 + 2)
    sizes = []
    while size < n:
        sizes.append(size)
        size *= 2
    sizes.append(n)
    return sizes


def eigenvalue_upper_bound(model: GameModel) -> dict | None:
    """Lyapunov-derived upper bound on the eigenvalue, from the declared data.

    Unbounded case: the drift inequality folds into sum W P <= e^{k1 - ell} W
    with k1 = max(0, max_{i in K} log(1 + C e^{ell_i}/W_i)), and the norm-like
    gap gives max_c <= ell + k2 with k2 = max_i (max_c_i - ell_i); the
    criterion value is then at most k1 + k2. Bounded case: the criterion is
    at most the drift rate gamma.
    """
    ly = model.lyapunov
    if ly is None:
        return None
    if ly.case == "bounded":
        return {"case": "bounded", "k1": float(ly.gamma), "k2": 0.0, "upper": float(ly.gamma)}
    logC = float(np.log(ly.C))
    k1 = 0.0
    for i in ly.K:
        k1 = max(k1, float(np.logaddexp(0.0, logC + ly.ell[i] - ly.log_W[i])))
    k2 = max(float(model.cost[i].max() - ly.ell[i]) for i in range(model.n_states))
    return {"case": "unbounded", "k1": k1, "k2": k2, "upper": k1 + k2}


def residual(model: GameModel, rho: float, log_psi, domain, tol_local=DEFAULT_TOL,
             threads: int = 1) -> float:
    """max over the domain of |log G psi(i) - rho - log psi(i)|.

    Zero exactly when (rho, psi) solves the equation on the domain under
    the zero-outside convention.
    """
    log_psi = np.asarray(log_psi, dtype=float)
    states = [int(s) for s in np.atleast_1d(domain) if np.isfinite(log_psi[int(s)])]
    log_G, _ = apply_operator(model, states, log_psi, tol_local=tol_local, threads=threads)
    return float(max(abs(log_G[i] - rho - log_psi[i]) for i in states))


def extract_selectors(model: GameModel, log_psi, domain, tol=DEFAULT_TOL,
                      threads: int = 1):
    """Per-state saddle strategies for the given eigenfunction.

    States outside the domain (or killed by the game) get the lowest-index
    pure action: play there never returns to the supported region under the
    zero-boundary reading, and simulation still needs a defined action.
    """
    log_psi = np.asarray(log_psi, dtype=float)
    member = set(int(s) for s in np.atleast_1d(domain) if np.isfinite(log_psi[int(s)]))
    _, saddles = apply_operator(model, sorted(member), log_psi, tol_local=tol, threads=threads)
    by_state = dict(zip(sorted(member), saddles))
    w1, w2 = [], []
    for i in range(model.n_states):
        mu_len, nu_len = model.n_actions(i)
        if i in by_state:
            w1.append(np.asarray(by_state[i].mu, dtype=float))
            w2.append(np.asarray(by_state[i].nu, dtype=float))
        else:
            a = np.zeros(mu_len)
            a[0] = 1.0
            b = np.zeros(nu_len)
            b[0] = 1.0
            w1.append(a)
            w2.append(b)
    return StationaryStrategy(w1), StationaryStrategy(w2)


def _boundary_warnings(model: GameModel, domain) -> list:
    out = []
    inside = np.zeros(model.n_states, dtype=bool)
    inside[domain] = True
    leak = 0.0
    for i in domain:
        mass_in = model.transition[i][:, :, inside].sum(axis=2)
        leak = max(leak, float((1.0 - mass_in).max()))
    if not inside.all():
        if leak >= BOUNDARY_MASS_WARN:
            out.append(f"one-step mass {leak:.3e} leaves the final domain; truncation suspect")
    else:
        top = model.n_states - 1
        into_top = max(
            (float(model.transition[i][:, :, top].max()) for i in domain if i != top),
            default=0.0,
        )
        if max(leak, into_top) >= BOUNDARY_MASS_WARN:
            out.append(
                f"window boundary receives one-step mass {max(leak, into_top):.3e}; "
                "truncation suspect")
    return out


def solve_ergodic_game(model: GameModel, ladder=None, tol_eig: float = DEFAULT_TOL,
                       tol_outer: float = DEFAULT_TOL_OUTER,
                       tol_local: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER,
                       threads: int = 1) -> SolveReport:
    """Ladder solve: Dirichlet eigenpairs on growing domains until stable.

    Stops once consecutive rungs agree in eigenvalue (tol_outer) and in
    eigenfunction (log domain, on the smaller domain). The report carries
    the full rung trace, selectors, residual and, when drift data exists,
    the eigenvalue bound check.
    """
    sizes = list(ladder) if ladder is not None else default_ladder(model)
    if not sizes or any(s2 <= s1 for s1, s2 in zip(sizes, sizes[1:])):
        raise ValueError(f"ladder must be strictly increasing, got {sizes}")
    if sizes[-1] > model.n_states:
        raise ValueError(f"ladder exceeds the window: {sizes[-1]} > {model.n_states}")
    if sizes[0] <= model.i0:
        raise ValueError(f"every rung must contain the reference state {model.i0}")

    rungs = []
    warnings = []
    prev: EigenPair | None = None
    certified = False
    total_damping = 0
    for k, size in enumerate(sizes, start=1):
        dom = DirichletDomain.prefix(model, size)
        eig = dirichlet_eigenpair(
            dom, tol=tol_eig, max_iter=max_iter, tol_local=tol_local,
            warm_start_log_psi=None if prev is None else prev.log_psi,
            threads=threads)
        rungs.append(LadderRung(k, size, eig.rho, eig.bracket[1] - eig.bracket[0],
                                eig.iterations))
        total_damping += eig.damping_events
        warnings.extend(eig.warnings)
        if prev is not None:
            shared = [i for i in prev.domain if np.isfinite(eig.log_psi[i])]
            dpsi = max((abs(eig.log_psi[i] - prev.log_psi[i]) for i in shared), default=np.inf)
            if abs(eig.rho - prev.rho) <= tol_outer and dpsi <= tol_outer:
                prev = eig
                certified = True
                break
        prev = eig
    if not certified:
        warnings.append(
            "ladder exhausted before the outer criterion was met; result is window-limited")

    final = prev
    res = residual(model, final.rho, final.log_psi, final.domain,
                   tol_local=tol_local, threads=threads)
    selectors = extract_selectors(model, final.log_psi, final.domain,
                                  tol=tol_local, threads=threads)
    warnings.extend(_boundary_warnings(model, final.domain))

    bounds = eigenvalue_upper_bound(model)
    if bounds is not None:
        tol_bound = max(tol_outer, 1e-6)
        for r in rungs:
            if r.rho > bounds["upper"] + tol_bound or r.rho < -tol_bound:
                warnings.append(
                    f"rung {r.index}: rho_n={r.rho!r} outside [0, k1+k2={bounds['upper']!r}]")

    return SolveReport(
        ladder=rungs,
        rho_star=final.rho,
        log_psi_star=final.log_psi,
        domain=final.domain,
        selectors=selectors,
        residual=res,
        bounds=bounds,
        certified=certified,
        diagnostics={
            "rungs": len(rungs),
            "damping_events": total_damping,
            "final_bracket": [float(final.bracket[0]), float(final.bracket[1])],
        },
        warnings=warnings,
    )


def uncontrolled_eigen_oracle(model: GameModel, tol: float = 1e-12,
                              max_iter: int = 200000) -> float:
    """log spectral radius of M(i,j) = e^{c(i)} P(j|i) for singleton actions.

    Dense power iteration with max normalization and a ratio bracket;
    half-step damping guards periodic chains. Independent of the saddle
    machinery on purpose: it exists to cross-check the solver.
    """
    n = model.n_states
    for i in range(n):
        mu, mv = model.n_actions(i)
        if mu != 1 or mv != 1:
            raise NotUncontrolled(f"state {i} has {mu}x{mv} actions")
    M = np.zeros((n, n))
    for i in range(n):
        M[i] = np.exp(model.cost[i][0, 0]) * model.transition[i][0, 0]
    v = np.ones(n)
    for sweep in range(1, max_iter + 1):
        w = M @ v
        pos = (v > 0) & (w > 0)
        if not pos.any():
            return NEG_INF
        ratios = w[pos] / v[pos]
        lo, hi = float(ratios.min()), float(ratios.max())
        if hi - lo <= tol * max(1.0, hi):
            return float(np.log(0.5 * (lo + hi)))
        scale = w.max()
        if scale <= 0:
            return NEG_INF
        w = w / scale
        if sweep > 200:
            w = 0.5 * (w + v)
            w = w / w.max()
        v = w
    raise NoConvergence(max_iter, hi - lo)

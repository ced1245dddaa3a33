"""Single-state saddle problems of the multiplicative dynamic-programming operator.

At state i with positive function psi (given in log domain), the local game is

    sup_nu inf_mu  exp(c(i,mu,nu)) * sum_j psi(j) P(j|i,mu,nu)

over mixed actions mu, nu. Writing C[u,v] = c(i,u,v) and
Q[u,v] = sum_j psi(j) P(j|i,u,v), the log payoff is

    L(mu, nu) = mu' C nu + log(mu' Q nu),

bilinear inside the exponent and inside the inner sum. Structure used here:

* fixed nu: L is concave in mu (linear plus log of linear), so the infimum
  over the simplex sits at a vertex: pure best responses for player 1.
* fixed mu: L depends on nu only through the two linear functionals
  x = (C' mu) . nu and y = (Q' mu) . nu, so sup_nu L is an exact 2-D
  problem: maximize x + log y over the convex hull of the per-column
  points (x_v, y_v). Segment optima have a closed form, which makes the
  reported duality gap a genuine certificate rather than an iteration
  heuristic.

The value solved here is sup_nu min_u L(delta_u, nu), the leading form of
the dynamic-programming display: a concave maximization over the simplex.
The outer maximizer is found by exact scalar search (|V| <= 2), the exact
planar method (|U| = 1), or an epigraph solve with Newton polishing.

Certification. L is concave in BOTH variables, so the two optimization
orders need not coincide: instances exist (see tests) where
inf_mu sup_nu exceeds sup_nu inf_mu by 0.1 in log scale. The reported
`gap` therefore certifies the computed lower value itself: a supergradient
linear program bounds max_nu h from above at the returned point, and the
bound is valid unconditionally (concavity of each pure payoff plus an
activation-slack term). The discrepancy between the two orders for the
best minimizing mixture found is reported separately as `order_gap`; it
vanishes whenever a genuine saddle point exists (pure saddles, constant
psi, singleton actions) and is diagnostic otherwise.

All tie-breaks pick the lowest action index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from ._util import NEG_INF, logsumexp

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000
_ACTIVE_TOL = 1e-9
_Y_FLOOR = 1e-300


class NoConvergence(RuntimeError):
    def __init__(self, iterations: int, gap: float):
        super().__init__(f"duality gap {gap:.3e} above tolerance after {iterations} iterations")
        self.iterations = iterations
        self.gap = gap


@dataclass
class LocalSaddle:
    """Certified solution of one state's saddle problem (log domain).

    gap bounds the suboptimality of log_value as a maximization of the
    lower-value function; order_gap reports sup_nu L(mu, nu) minus the
    lower value for the returned mu, which is zero exactly when (mu, nu)
    is a saddle point of the mixed extension.
    """

    log_value: float
    mu: np.ndarray
    nu: np.ndarray
    gap: float
    order_gap: float = 0.0
    empty_support: bool = False
    iterations: int = 0


def local_matrices(model, i: int, log_psi: np.ndarray):
    """(C, L) for state i: C costs, L[u,v] = log sum_j psi(j) P(j|i,u,v)."""
    lt = model.log_transition(i)
    L = logsumexp(lt + np.asarray(log_psi, dtype=float)[None, None, :], axis=2)
    return model.cost[i], np.asarray(L, dtype=float)


def local_payoff_core(C: np.ndarray, L: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> float:
    """mu' C nu + log(mu' Q nu) with Q = exp(L), computed shift-stably."""
    finite = np.isfinite(L)
    if not finite.any():
        return NEG_INF
    m0 = float(L[finite].max())
    Q = np.exp(L - m0)
    y = float(mu @ Q @ nu)
    if y <= 0.0:
        return NEG_INF
    return float(mu @ C @ nu) + m0 + float(np.log(y))


def local_payoff(model, i: int, log_psi, mu, nu) -> float:
    C, L = local_matrices(model, i, log_psi)
    return local_payoff_core(C, L, np.asarray(mu, float), np.asarray(nu, float))


def _pure_values(C: np.ndarray, Qs: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """f_u(nu) = c_u . nu + log(q_u . nu) for every pure u (shifted Q)."""
    y = Qs @ nu
    with np.errstate(divide="ignore"):
        return C @ nu + np.log(np.maximum(y, 0.0))


def best_response_pure_min_core(C: np.ndarray, L: np.ndarray, nu: np.ndarray):
    finite = np.isfinite(L)
    if not finite.any():
        return 0, NEG_INF
    m0 = float(L[finite].max())
    f = _pure_values(C, np.exp(L - m0), nu) + m0
    u = int(np.argmin(f))  # argmin takes the first minimizer: lowest index
    return u, float(f[u])


def best_response_pure_min(model, i: int, log_psi, nu):
    C, L = local_matrices(model, i, log_psi)
    return best_response_pure_min_core(C, L, np.asarray(nu, float))


# ---------------------------------------------------------------------------
# exact inner maximization over nu for a fixed mu


def _max_x_plus_log_y(x: np.ndarray, y: np.ndarray):
    """Maximize x.w + log(y.w) over the simplex, exactly.

    The objective depends on w only through the planar point
    (x.w, y.w) in conv{(x_v, y_v)}; it is increasing in both coordinates
    and concave, so the maximum lies on a vertex or on a two-vertex
    segment, where stationarity x_q - x_p + (y_q - y_p)/y(t) = 0 solves in
    closed form. Enumerating all pairs is exact for these sizes.

    Returns (value, weights). Columns with y = 0 contribute only through
    mixtures; if every y is 0 the value is -inf at the lowest index vertex.
    """
    k = len(x)
    if k == 1:
        val = x[0] + (np.log(y[0]) if y[0] > 0 else NEG_INF)
        return float(val), np.ones(1)
    if np.all(y <= 0.0):
        w = np.zeros(k)
        w[0] = 1.0
        return NEG_INF, w
    with np.errstate(divide="ignore"):
        vertex_vals = x + np.log(np.maximum(y, 0.0))
    best_v = int(np.argmax(vertex_vals))
    best_val = float(vertex_vals[best_v])
    best_w = np.zeros(k)
    best_w[best_v] = 1.0
    for p in range(k):
        for q in range(p + 1, k):
            dx = x[q] - x[p]
            dy = y[q] - y[p]
            if dx == 0.0 or dy == 0.0:
                continue  # segment optimum degenerates to an endpoint
            ystar = -dy / dx
            if ystar <= 0.0:
                continue
            t = (ystar - y[p]) / dy
            if not (0.0 < t < 1.0):
                continue
            yv = y[p] + t * dy
            if yv <= 0.0:
                continue
            val = x[p] + t * dx + np.log(yv)
            if val > best_val + 1e-15 * max(1.0, abs(best_val)):
                best_val = float(val)
                best_w = np.zeros(k)
                best_w[p] = 1.0 - t
                best_w[q] = t
    return best_val, best_w


def _sup_over_nu(C: np.ndarray, Qs: np.ndarray, mu: np.ndarray):
    """Exact sup_nu of the log payoff for fixed mu (Q already shifted)."""
    return _max_x_plus_log_y(C.T @ mu, Qs.T @ mu)


# ---------------------------------------------------------------------------
# lower problem: maximize h(nu) = min_u f_u(nu) over the nu-simplex


def _h_and_active(C, Qs, nu, atol=_ACTIVE_TOL):
    f = _pure_values(C, Qs, nu)
    h = float(f.min())
    if not np.isfinite(h):
        active = np.nonzero(~np.isfinite(f))[0]
    else:
        active = np.nonzero(f <= h + atol * max(1.0, abs(h)))[0]
    return h, f, active


def _maximize_h_1d(C, Qs):
    """|V| = 2: bisection on the derivative sign of the concave h(t)."""

    def h(t):
        nu = np.array([1.0 - t, t])
        return _pure_values(C, Qs, nu).min()

    def slope(t, eps=1e-9):
        lo = max(0.0, t - eps)
        hi = min(1.0, t + eps)
        return (h(hi) - h(lo)) / (hi - lo)

    lo, hi = 0.0, 1.0
    if slope(0.0) <= 0.0:
        t = 0.0
    elif slope(1.0) >= 0.0:
        t = 1.0
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if slope(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-16:
                break
        t = 0.5 * (lo + hi)
        # the kink or stationary point may sit a hair off the bisection
        # limit; a tiny golden polish removes the last bits
        span = max(hi - lo, 1e-12)
        ts = np.clip(np.linspace(t - 3 * span, t + 3 * span, 25), 0.0, 1.0)
        t = float(ts[int(np.argmax([h(tt) for tt in ts]))])
    nu = np.array([1.0 - t, t])
    return nu


def _maximize_h_epigraph(C, Qs, starts):
    """|V| >= 3: SLSQP on max s subject to s <= f_u(nu), nu on the simplex."""
    mU, mV = C.shape

    def neg_obj(z):
        return -z[-1]

    def neg_obj_grad(z):
        g = np.zeros(mV + 1)
        g[-1] = -1.0
        return g

    cons = []

    def make_fu(u):
        def fun(z):
            nu = z[:mV]
            y = float(Qs[u] @ nu)
            return C[u] @ nu + np.log(max(y, _Y_FLOOR)) - z[-1]

        def jac(z):
            nu = z[:mV]
            y = max(float(Qs[u] @ nu), _Y_FLOOR)
            g = np.empty(mV + 1)
            g[:mV] = C[u] + Qs[u] / y
            g[-1] = -1.0
            return g

        return {"type": "ineq", "fun": fun, "jac": jac}

    for u in range(mU):
        cons.append(make_fu(u))
    cons.append({
        "type": "eq",
        "fun": lambda z: z[:mV].sum() - 1.0,
        "jac": lambda z: np.concatenate([np.ones(mV), [0.0]]),
    })
    bounds = [(0.0, 1.0)] * mV + [(None, None)]

    best_nu, best_h = None, NEG_INF
    for nu0 in starts:
        h0 = _pure_values(C, Qs, nu0).min()
        if not np.isfinite(h0):
            continue
        z0 = np.concatenate([nu0, [h0]])
        res = minimize(neg_obj, z0, jac=neg_obj_grad, method="SLSQP",
                       bounds=bounds, constraints=cons,
                       options={"maxiter": 300, "ftol": 1e-14})
        nu = np.clip(res.x[:mV], 0.0, None)
        s = nu.sum()
        if s <= 0:
            continue
        nu /= s
        h = _pure_values(C, Qs, nu).min()
        if h > best_h:
            best_h, best_nu = float(h), nu
    if best_nu is None:
        best_nu = starts[0]
    return best_nu


def _newton_polish(C, Qs, nu):
    """Refine nu on its detected active sets and recover KKT multipliers.

    Solves the stationarity system (active payoffs equalized, multiplier-
    weighted gradient constant over the support of nu, both sets summing
    to one) by least-squares Newton steps; the payoff often depends on nu
    through few functionals, so the Jacobian can be singular and lstsq is
    the right tool. Returns (nu, mu_multipliers_or_None).
    """
    mU, mV = C.shape
    h, _, A = _h_and_active(C, Qs, nu, atol=1e-7)
    F = np.nonzero(nu > 1e-10)[0]
    nA, nF = len(A), len(F)
    if nF == 0 or not np.isfinite(h):
        return nu, None

    def residual(z):
        nuF = z[:nF]
        lam = z[nF:]
        nu_full = np.zeros(mV)
        nu_full[F] = nuF
        y = Qs[A] @ nu_full
        if np.any(y <= 0):
            return None
        fA = C[A] @ nu_full + np.log(y)
        grads = C[A][:, F] + Qs[A][:, F] / y[:, None]
        gbar = lam @ grads
        return np.concatenate([
            fA - fA.mean(),
            gbar - gbar.mean(),
            [nuF.sum() - 1.0, lam.sum() - 1.0],
        ])

    z = np.concatenate([nu[F], np.full(nA, 1.0 / nA)])
    converged = False
    for _ in range(50):
        res = residual(z)
        if res is None:
            break
        if np.max(np.abs(res)) < 1e-14:
            converged = True
            break
        J = np.empty((len(res), len(z)))
        eps = 1e-7
        for kk in range(len(z)):
            zp = z.copy()
            zp[kk] += eps
            rp = residual(zp)
            J[:, kk] = 0.0 if rp is None else (rp - res) / eps
        try:
            step = np.linalg.lstsq(J, -res, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        z = z + np.clip(step, -0.5, 0.5)
        z = np.maximum(z, 0.0)
    if not converged:
        return nu, None
    cand = np.zeros(mV)
    cand[F] = np.maximum(z[:nF], 0.0)
    if cand.sum() <= 0:
        return nu, None
    cand /= cand.sum()
    if _pure_values(C, Qs, cand).min() < h:
        return nu, None
    lamA = np.maximum(z[nF:], 0.0)
    mu = None
    if lamA.sum() > 0:
        mu = np.zeros(mU)
        mu[A] = lamA / lamA.sum()
    return cand, mu


def _mu_candidates(C, Qs, nu, active, lam_mu, groups=True):
    """Collect minimizer mixtures to certify against the exact sup over nu."""
    mU = C.shape[0]
    cands = []
    for u in active:
        w = np.zeros(mU)
        w[u] = 1.0
        cands.append(w)
    if lam_mu is not None and lam_mu.sum() > 0:
        cands.append(lam_mu / lam_mu.sum())
    if not groups:
        return cands
    # mixtures can only straddle pure actions whose one-step mass under nu
    # agrees; group the active set by that mass and equalize the payoff
    # gradient over the support of nu by linear programming
    x = Qs[active] @ nu
    supp = np.nonzero(nu > 1e-12)[0]
    off = np.nonzero(nu <= 1e-12)[0]
    for rtol in (1e-9, 1e-6):
        groups = []
        used = np.zeros(len(active), dtype=bool)
        for a in range(len(active)):
            if used[a]:
                continue
            g = np.nonzero(np.abs(x - x[a]) <= rtol * max(1.0, abs(x[a])))[0]
            used[g] = True
            if len(g) >= 2:
                groups.append(active[g])
        for g in groups:
            xbar = float(np.mean(Qs[g] @ nu))
            if xbar <= 0:
                continue
            D = C[g] + Qs[g] / xbar  # (|g|, mV): gradient rows, linear in mu
            ng = len(g)
            # variables: mu_g (ng), kappa, eps; minimize eps
            n_var = ng + 2
            cost_vec = np.zeros(n_var)
            cost_vec[-1] = 1.0
            A_ub, b_ub = [], []
            for v in supp:
                row = np.zeros(n_var)
                row[:ng] = D[:, v]
                row[ng] = -1.0
                row[-1] = -1.0
                A_ub.append(row)
                b_ub.append(0.0)
                row2 = np.zeros(n_var)
                row2[:ng] = -D[:, v]
                row2[ng] = 1.0
                row2[-1] = -1.0
                A_ub.append(row2)
                b_ub.append(0.0)
            for v in off:
                row = np.zeros(n_var)
                row[:ng] = D[:, v]
                row[ng] = -1.0
                row[-1] = -1.0
                A_ub.append(row)
                b_ub.append(0.0)
            A_eq = np.zeros((1, n_var))
            A_eq[0, :ng] = 1.0
            res = linprog(cost_vec, A_ub=np.asarray(A_ub), b_ub=np.asarray(b_ub),
                          A_eq=A_eq, b_eq=[1.0],
                          bounds=[(0, None)] * ng + [(None, None), (0, None)],
                          method="highs")
            if res.status == 0:
                w = np.zeros(mU)
                w[g] = np.maximum(res.x[:ng], 0.0)
                if w.sum() > 0:
                    cands.append(w / w.sum())
    return cands


def _fictitious_play(C, Qs, iters=2000):
    """Averaged play with exact best responses on both sides."""
    mU, mV = C.shape
    mu_sum = np.zeros(mU)
    nu_sum = np.zeros(mV)
    nu_avg = np.full(mV, 1.0 / mV)
    for k in range(1, iters + 1):
        f = _pure_values(C, Qs, nu_avg)
        u = int(np.argmin(f))
        mu_sum[u] += 1.0
        mu_avg = mu_sum / mu_sum.sum()
        _, w = _sup_over_nu(C, Qs, mu_avg)
        nu_sum += w
        nu_avg = nu_sum / nu_sum.sum()
    return mu_sum / mu_sum.sum(), nu_avg


def _value_and_grads(C, Qs, nu):
    """Pure payoffs f_u(nu), their gradients, and the one-step masses."""
    y = Qs @ nu
    with np.errstate(divide="ignore"):
        f = C @ nu + np.log(np.maximum(y, 0.0))
    ysafe = np.maximum(y, _Y_FLOOR)
    G = C + Qs / ysafe[:, None]
    return f, G, y


def _pair_bound(slack, A):
    """min over lam in [0,1] of lam s_i + (1-lam) s_j + max_v of the mixed row.

    Piecewise-linear convex in lam; checking endpoints and all crossing
    points of the row lines is exact and avoids an LP call.
    """
    s_i, s_j = slack
    a, b = A  # rows: a_v at lam=1, b_v at lam=0
    cands = [0.0, 1.0]
    for v in range(len(a)):
        for w in range(v + 1, len(a)):
            den = (a[v] - b[v]) - (a[w] - b[w])
            if den != 0.0:
                lam = (b[w] - b[v]) / den
                if 0.0 < lam < 1.0:
                    cands.append(lam)
    best = np.inf
    for lam in cands:
        val = lam * s_i + (1 - lam) * s_j + np.max(lam * a + (1 - lam) * b)
        if val < best:
            best = val
    return best


def _cert_gap(C, Qs, nu, cheap_target=None):
    """Certified bound on max_nu' h(nu') - h(nu), valid unconditionally.

    For any weights lam over pure actions with finite payoff at nu,
    concavity of each f_u gives

        h(nu') <= sum_u lam_u f_u(nu')
               <= h(nu) + sum_u lam_u (f_u(nu) - h(nu))
                  + max_v w_v - w . nu,     w = sum_u lam_u grad f_u(nu).

    Single-action bounds come free; pair mixtures have a closed form; the
    lam-optimal bound over three or more actions is a tiny linear program,
    only reached when the cheaper bounds miss `cheap_target`.
    """
    f, G, y = _value_and_grads(C, Qs, nu)
    h = float(f.min())
    if not np.isfinite(h):
        return np.inf, h
    live = np.nonzero(y > 0)[0]
    slack = f[live] - h
    g0 = G[live] @ nu
    rows = G[live] - g0[:, None]
    per_u = slack + rows.max(axis=1)
    best = max(float(per_u.min()), 0.0)
    if cheap_target is not None and best <= cheap_target:
        return best, h
    k = len(live)
    if k == 1:
        return best, h
    order = np.argsort(per_u)[: min(k, 4)]
    for ii in range(len(order)):
        for jj in range(ii + 1, len(order)):
            i, j = order[ii], order[jj]
            val = _pair_bound((slack[i], slack[j]), (rows[i], rows[j]))
            if val < best:
                best = max(float(val), 0.0)
    if cheap_target is not None and best <= cheap_target:
        return best, h
    if k > 2:
        # variables lam (k), tau; minimize slack.lam + tau
        cvec = np.concatenate([slack, [1.0]])
        A_ub = np.concatenate([rows.T, -np.ones((C.shape[1], 1))], axis=1)
        b_ub = np.zeros(C.shape[1])
        A_eq = np.concatenate([np.ones((1, k)), np.zeros((1, 1))], axis=1)
        res = linprog(cvec, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * k + [(None, None)], method="highs")
        if res.status == 0 and res.fun < best:
            best = max(float(res.fun), 0.0)
    return best, h


def solve_saddle_core(C: np.ndarray, L: np.ndarray, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> LocalSaddle:
    C = np.asarray(C, dtype=float)
    L = np.asarray(L, dtype=float)
    mU, mV = C.shape

    finite = np.isfinite(L)
    if not finite.any():
        mu = np.zeros(mU)
        mu[0] = 1.0
        nu = np.zeros(mV)
        nu[0] = 1.0
        return LocalSaddle(NEG_INF, mu, nu, 0.0, empty_support=True)
    m0 = float(L[finite].max())
    Qs = np.exp(L - m0)

    dead_rows = ~np.any(Qs > 0.0, axis=1)
    if dead_rows.any():
        # player 1 owns an action that sends all mass outside the domain:
        # the multiplicative payoff collapses to zero
        u = int(np.nonzero(dead_rows)[0][0])
        mu = np.zeros(mU)
        mu[u] = 1.0
        nu = np.zeros(mV)
        nu[0] = 1.0
        return LocalSaddle(NEG_INF, mu, nu, 0.0, empty_support=True)

    if mU == 1 and mV == 1:
        val = C[0, 0] + L[0, 0]
        return LocalSaddle(float(val), np.ones(1), np.ones(1), 0.0)

    def pick_mu(nu, h, lam_mu, groups):
        """Best minimizing mixture by the exact planar sup; order_gap with it."""
        _, _, active = _h_and_active(C, Qs, nu)
        cands = _mu_candidates(C, Qs, nu, active, lam_mu, groups=groups)
        best_mu, best_phi = None, np.inf
        for mu in cands:
            phi, _ = _sup_over_nu(C, Qs, mu)
            if phi < best_phi:
                best_phi, best_mu = phi, mu
        if best_mu is None:
            best_mu = np.zeros(mU)
            best_mu[0] = 1.0
            best_phi, _ = _sup_over_nu(C, Qs, best_mu)
        return best_mu, max(best_phi - h, 0.0)

    def finish(nu, h, cert, lam_mu, iterations):
        mu1, order1 = pick_mu(nu, h, lam_mu, groups=False)
        if order1 > max(tol, 1e-9):
            # mixing may be required; the group LP covers every case in
            # which a saddle point actually exists
            mu2, order2 = pick_mu(nu, h, lam_mu, groups=True)
            if order2 < order1:
                mu1, order1 = mu2, order2
        return LocalSaddle(h + m0, mu1, nu, cert, order_gap=order1,
                           iterations=iterations)

    # fast path: pure-pure saddle candidate from the pure payoff matrix
    with np.errstate(divide="ignore"):
        pure = C + np.log(np.maximum(Qs, 0.0))
    v_star = int(np.argmax(pure.min(axis=0)))
    nu0 = np.zeros(mV)
    nu0[v_star] = 1.0
    cert0, h0 = _cert_gap(C, Qs, nu0, cheap_target=tol)
    if cert0 <= tol:
        return finish(nu0, h0, cert0, None, 0)

    # exact planar solve when player 1 has a single action
    if mU == 1:
        _, nu = _sup_over_nu(C, Qs, np.ones(1))
        cert, h = _cert_gap(C, Qs, nu)
        return finish(nu, h, cert, None, 0)

    # full lower solve, cheapest viable stage first
    if mV == 1:
        nu = np.ones(1)
    elif mV == 2:
        nu = _maximize_h_1d(C, Qs)
    else:
        nu = _maximize_h_epigraph(C, Qs, [np.full(mV, 1.0 / mV)])
    nu, lam = _newton_polish(C, Qs, nu)
    cert, h = _cert_gap(C, Qs, nu)
    if cert <= tol:
        return finish(nu, h, cert, lam, 0)

    if mV >= 3:
        starts = []
        for v in range(mV):
            e = np.full(mV, 1e-6)
            e[v] = 1.0
            starts.append(e / e.sum())
        nu2 = _maximize_h_epigraph(C, Qs, starts)
        nu2, lam2 = _newton_polish(C, Qs, nu2)
        cert2, h2 = _cert_gap(C, Qs, nu2)
        if h2 > h or (h2 == h and cert2 < cert):
            nu, h, cert, lam = nu2, h2, cert2, lam2
        if cert <= tol:
            return finish(nu, h, cert, lam, 0)

    # escalation: averaged fictitious play sometimes lands nearer the
    # maximizer on stubborn nonsmooth instances; re-polish from there
    iters = min(max_iter, 2000)
    _, nu_fp = _fictitious_play(C, Qs, iters=iters)
    nu_fp, lam_fp = _newton_polish(C, Qs, nu_fp)
    cert_fp, h_fp = _cert_gap(C, Qs, nu_fp)
    if h_fp > h or (h_fp == h and cert_fp < cert):
        nu, h, cert, lam = nu_fp, h_fp, cert_fp, lam_fp
    if cert <= tol:
        return finish(nu, h, cert, lam, iters)
    raise NoConvergence(iters, cert)


def solve_saddle(model, i: int, log_psi, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> LocalSaddle:
    C, L = local_matrices(model, i, log_psi)
    return solve_saddle_core(C, L, tol=tol, max_iter=max_iter)

"""Independent reference computations for the test suite.

Everything here is deliberately mechanical (enumeration, section search,
dense linear algebra, closed forms) and shares no code path with the
solvers it checks.
"""

import itertools

import numpy as np


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All weight vectors with denominator `resolution` on the k-simplex."""
    if k == 1:
        return np.ones((1, 1))
    pts = []
    for comp in itertools.combinations(range(resolution + k - 1), k - 1):
        parts = []
        prev = -1
        for c in comp:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + k - 2 - prev)
        pts.append(parts)
    return np.asarray(pts, dtype=float) / float(resolution)


def ternary_max(fn, lo=0.0, hi=1.0, iters=140):
    """Argmax of a quasiconcave scalar function by section search."""
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if fn(m1) < fn(m2):
            lo = m1
        else:
            hi = m2
    return 0.5 * (lo + hi)


def lower_value_exact(C, L):
    """sup over nu of min over pure u of [c_u.nu + log(q_u.nu)], |V| <= 3.

    The inner min is enumerated; the outer max uses nested ternary search,
    exact because affine slices of the simplex keep the function concave.
    """
    C = np.asarray(C, dtype=float)
    L = np.asarray(L, dtype=float)
    mU, mV = C.shape
    finite = np.isfinite(L)
    if not finite.any():
        return float("-inf")
    m0 = float(L[finite].max())
    Q = np.exp(L - m0)

    def h(nu):
        y = Q @ nu
        with np.errstate(divide="ignore"):
            return float(np.min(C @ nu + np.log(np.maximum(y, 0.0)))) + m0

    if mV == 1:
        return h(np.ones(1))
    if mV == 2:
        t = ternary_max(lambda t: h(np.array([1.0 - t, t])))
        return h(np.array([1.0 - t, t]))
    if mV == 3:
        def slice_max(t):
            def inner(s):
                return h(np.array([(1 - t) * (1 - s), (1 - t) * s, t]))
            return inner(ternary_max(inner))
        t = ternary_max(slice_max)
        return slice_max(t)
    raise ValueError("exact oracle covers |V| <= 3")


def lower_value_grid(C, L, resolution=300, refine_rounds=40):
    """The literal grid oracle: sup over a nu grid of the exact inner min,
    then pattern refinement around the best point."""
    C = np.asarray(C, dtype=float)
    L = np.asarray(L, dtype=float)
    mU, mV = C.shape
    finite = np.isfinite(L)
    m0 = float(L[finite].max())
    Q = np.exp(L - m0)

    def h_on(NU):
        X = NU @ C.T
        Y = NU @ Q.T
        with np.errstate(divide="ignore"):
            return (X + np.log(np.maximum(Y, 0.0)) + m0).min(axis=1)

    NU = simplex_grid(mV, resolution)
    vals = h_on(NU)
    k = int(np.argmax(vals))
    best_nu, best_val = NU[k], float(vals[k])
    if mV == 1:
        return best_val
    D = simplex_grid(mV, 24)
    radius = 0.2
    for _ in range(refine_rounds):
        cand = (1 - radius) * best_nu[None, :] + radius * D
        vals = h_on(cand)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_nu = float(vals[k]), cand[k]
        else:
            radius *= 0.5
    return best_val


def perron_log_radius(M) -> float:
    """log spectral radius by dense eigenvalues."""
    return float(np.log(np.max(np.abs(np.linalg.eigvals(np.asarray(M, dtype=float))))))


def bilinear_2x2_mixed(A):
    """Optimal mixed strategies of a 2x2 zero-sum matrix game, closed form.

    Returns (p, q, value) with the row player maximizing p' A q. Assumes an
    interior (fully mixed) solution exists.
    """
    A = np.asarray(A, dtype=float)
    (a, b), (c, d) = A
    den = a - b - c + d
    p = (d - c) / den
    q = (d - b) / den
    value = (a * d - b * c) / den
    return np.array([p, 1 - p]), np.array([q, 1 - q]), value

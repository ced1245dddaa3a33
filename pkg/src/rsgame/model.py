"""Game model containers, ingestion, validation, and stability checkers.

A model is a finite truncation window over a countable state space: states
0..N-1, per-state finite action sets for both players, a (sub)stochastic
transition tensor and a cost tensor. Probability mass leaving the window is
tracked as exit mass; Dirichlet solvers treat it as absorption at zero.

The risk parameter theta is folded into the cost tensor at construction
(c <- theta * c), so all downstream code works with theta = 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._util import logsumexp

ROW_SUM_TOL = 1e-12
CLOSED_TOL = 1e-12
STRATEGY_TOL = 1e-12
# Drift inequality must hold strictly; slack at or below this fails the check.
LYAPUNOV_SLACK_PASS = 1e-14


class ModelError(ValueError):
    pass


class MissingLyapunovData(ModelError):
    pass


class SchemaError(ModelError):
    pass


@dataclass
class LyapunovData:
    """Weight function and drift data for the blanket stability condition.

    The weight is stored in log domain: window cases of interest have
    W(i) = exp(i^2/6 + 1), which overflows float64 long before useful
    window sizes. Exactly one of `gamma` (bounded-cost drift rate) or
    `ell` (per-state rate, unbounded costs) is present.
    """

    log_W: np.ndarray
    C: float
    K: np.ndarray  # sorted state indices of the finite exception set
    gamma: float | None = None
    ell: np.ndarray | None = None

    def __post_init__(self):
        self.log_W = np.asarray(self.log_W, dtype=float)
        self.K = np.asarray(sorted(set(int(k) for k in np.atleast_1d(self.K))), dtype=int)
        if self.ell is not None:
            self.ell = np.asarray(self.ell, dtype=float)
        if (self.gamma is None) == (self.ell is None):
            raise ModelError("exactly one of gamma or ell must be given")

    @property
    def case(self) -> str:
        return "bounded" if self.gamma is not None else "unbounded"


@dataclass
class GameModel:
    """Truncation-window game: states, per-state actions, kernel, costs.

    transition[i] has shape (mU_i, mV_i, n_states); cost[i] has shape
    (mU_i, mV_i) and is already scaled by theta. Arrays are frozen after
    construction; checkers are read-only.
    """

    n_states: int
    actions_p1: list
    actions_p2: list
    transition: list
    cost: list
    theta: float
    i0: int
    lyapunov: LyapunovData | None = None
    _log_transition: list = field(default=None, repr=False)

    def __post_init__(self):
        for i in range(self.n_states):
            self.transition[i] = np.ascontiguousarray(self.transition[i], dtype=float)
            self.cost[i] = np.ascontiguousarray(self.cost[i], dtype=float)
            self.transition[i].flags.writeable = False
            self.cost[i].flags.writeable = False

    def n_actions(self, i: int) -> tuple[int, int]:
        return len(self.actions_p1[i]), len(self.actions_p2[i])

    def row_sums(self, i: int) -> np.ndarray:
        return self.transition[i].sum(axis=2)

    def exit_mass(self, i: int) -> np.ndarray:
        return 1.0 - self.row_sums(i)

    def max_exit_mass(self) -> float:
        return max(float(self.exit_mass(i).max()) for i in range(self.n_states))

    def is_closed(self, tol: float = CLOSED_TOL) -> bool:
        return self.max_exit_mass() <= tol and all(
            float(self.exit_mass(i).min()) >= -tol for i in range(self.n_states)
        )

    def log_transition(self, i: int) -> np.ndarray:
        if self._log_transition is None:
            logs = []
            for k in range(self.n_states):
                with np.errstate(divide="ignore"):
                    lt = np.log(self.transition[k])
                lt.flags.writeable = False
                logs.append(lt)
            self._log_transition = logs
        return self._log_transition[i]


def make_model(
    n_states,
    actions_p1,
    actions_p2,
    transition,
    cost,
    theta=1.0,
    i0=0,
    lyapunov=None,
) -> GameModel:
    """Normalize raw inputs into a GameModel, applying the theta scaling."""
    if theta <= 0:
        raise ModelError(f"theta must be strictly positive, got {theta}")
    n = int(n_states)
    a1 = [list(a) for a in actions_p1]
    a2 = [list(a) for a in actions_p2]
    if len(a1) != n or len(a2) != n:
        raise ModelError("actions_p1/actions_p2 must have one entry per state")
    tr, co = [], []
    for i in range(n):
        mu, mv = len(a1[i]), len(a2[i])
        P = np.asarray(transition[i], dtype=float)
        C = np.asarray(cost[i], dtype=float)
        if P.shape != (mu, mv, n):
            raise ModelError(f"transition[{i}] must have shape {(mu, mv, n)}, got {P.shape}")
        if C.shape != (mu, mv):
            raise ModelError(f"cost[{i}] must have shape {(mu, mv)}, got {C.shape}")
        tr.append(P)
        co.append(theta * C)
    return GameModel(
        n_states=n,
        actions_p1=a1,
        actions_p2=a2,
        transition=tr,
        cost=co,
        theta=float(theta),
        i0=int(i0),
        lyapunov=lyapunov,
    )


@dataclass
class StationaryStrategy:
    """Per-state mixed action weights for one player."""

    weights: list

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]

    @staticmethod
    def pure(model: GameModel, player: int, idx) -> "StationaryStrategy":
        counts = [model.n_actions(i)[player - 1] for i in range(model.n_states)]
        if np.isscalar(idx):
            idx = [idx] * model.n_states
        ws = []
        for i, m in enumerate(counts):
            w = np.zeros(m)
            w[int(idx[i])] = 1.0
            ws.append(w)
        return StationaryStrategy(ws)

    @staticmethod
    def uniform(model: GameModel, player: int) -> "StationaryStrategy":
        return StationaryStrategy(
            [np.full(model.n_actions(i)[player - 1], 1.0 / model.n_actions(i)[player - 1])
             for i in range(model.n_states)]
        )

    def validate_for(self, model: GameModel, player: int) -> list[str]:
        problems = []
        if len(self.weights) != model.n_states:
            return [f"strategy has {len(self.weights)} states, model has {model.n_states}"]
        for i, w in enumerate(self.weights):
            m = model.n_actions(i)[player - 1]
            if w.shape != (m,):
                problems.append(f"state {i}: {w.shape[0]} weights for {m} actions")
                continue
            if w.min() < 0:
                problems.append(f"state {i}: negative weight {w.min()}")
            if abs(w.sum() - 1.0) > STRATEGY_TOL:
                problems.append(f"state {i}: weights sum to {w.sum()!r}")
        return problems


# ---------------------------------------------------------------------------
# validation


@dataclass
class Violation:
    kind: str
    coords: tuple
    value: float
    message: str
    severity: str = "error"


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        """Empty report: every invariant holds."""
        return not self.violations

    @property
    def structurally_sound(self) -> bool:
        """No error-severity findings; warning-severity ones may remain.

        Cost-sign findings are warnings: kernels stay well defined under
        negative costs, the sign matters to the stability theory, and
        standard parameterizations violate it near the origin on purpose.
        """
        return all(v.severity != "error" for v in self.violations)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "structurally_sound": self.structurally_sound,
            "violations": [
                {"kind": v.kind, "coords": list(v.coords), "value": v.value,
                 "message": v.message, "severity": v.severity}
                for v in self.violations
            ],
        }


def validate_model(model: GameModel) -> ValidationReport:
    """Diagnostic sweep over every invariant; never raises.

    The report names every offending (i, u, v) coordinate so a bad row can
    be located in the source document directly.
    """
    out = []
    if not (0 <= model.i0 < model.n_states):
        out.append(Violation("bad_reference_state", (model.i0,), float(model.i0),
                             f"i0={model.i0} outside 0..{model.n_states - 1}"))
    for i in range(model.n_states):
        mu, mv = model.n_actions(i)
        if mu == 0:
            out.append(Violation("empty_actions_p1", (i,), 0.0, f"state {i} has no player-1 actions"))
        if mv == 0:
            out.append(Violation("empty_actions_p2", (i,), 0.0, f"state {i} has no player-2 actions"))
        if mu == 0 or mv == 0:
            continue
        P = model.transition[i]
        C = model.cost[i]
        for u in range(mu):
            for v in range(mv):
                row = P[u, v]
                neg = row.min()
                if neg < 0:
                    j = int(row.argmin())
                    out.append(Violation("negative_probability", (i, u, v, j), float(neg),
                                         f"P({j}|{i},{u},{v}) = {neg}"))
                s = float(row.sum())
                if s > 1.0 + ROW_SUM_TOL:
                    out.append(Violation("row_sum_exceeds_one", (i, u, v), s,
                                         f"sum_j P(j|{i},{u},{v}) = {s!r} > 1"))
                if C[u, v] < 0:
                    out.append(Violation("negative_cost", (i, u, v), float(C[u, v]),
                                         f"c({i},{u},{v}) = {C[u, v]} < 0",
                                         severity="warning"))
    if model.lyapunov is not None:
        ly = model.lyapunov
        if ly.log_W.shape != (model.n_states,):
            out.append(Violation("lyapunov_shape", (), 0.0, "W must have one entry per state"))
        else:
            for i in range(model.n_states):
                if ly.log_W[i] < -1e-15:  # W >= 1  <=>  log W >= 0
                    out.append(Violation("lyapunov_W_below_one", (i,), float(np.exp(ly.log_W[i])),
                                         f"W({i}) = {np.exp(ly.log_W[i])} < 1"))
        if ly.ell is not None and ly.ell.shape != (model.n_states,):
            out.append(Violation("lyapunov_shape", (), 0.0, "ell must have one entry per state"))
        if ly.C <= 0:
            out.append(Violation("lyapunov_C_nonpositive", (), float(ly.C), "C must be > 0"))
        for k in ly.K:
            if not (0 <= k < model.n_states):
                out.append(Violation("lyapunov_K_out_of_window", (int(k),), float(k),
                                     f"K contains state {k} outside the window"))
    return ValidationReport(out)


# ---------------------------------------------------------------------------
# Lyapunov drift checker


@dataclass
class LyapunovReport:
    case: str
    passed: bool
    slack: np.ndarray  # per state, log-domain: log RHS - max_{u,v} log LHS
    worst_state: int
    norm_like: dict | None
    gamma_check: dict | None

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "passed": self.passed,
            "slack": [float(s) for s in self.slack],
            "worst_state": self.worst_state,
            "norm_like": self.norm_like,
            "gamma_check": self.gamma_check,
        }


def _drift_lhs_log(model: GameModel, i: int) -> float:
    """max over (u,v) of log sum_j W(j) P(j|i,u,v), in log domain."""
    ly = model.lyapunov
    lt = model.log_transition(i)  # (mU, mV, N)
    vals = logsumexp(lt + ly.log_W[None, None, :], axis=2)
    return float(vals.max())


def check_lyapunov(model: GameModel) -> LyapunovReport:
    """Check the drift inequality sum_j W(j)P(j|i,u,v) <= C 1_K(i) + e^{-rate} W(i).

    All arithmetic in log domain: the weight function typically grows like
    exp(i^2/6) and is not representable linearly on useful windows. Slack is
    log RHS - log LHS per state (worst action pair); a state passes when its
    slack exceeds LYAPUNOV_SLACK_PASS.

    For the unbounded case the report also carries a finite-window surrogate
    of the norm-like requirement on ell(i) - max_{u,v} c(i,u,v): the sequence
    must have a nondecreasing tail of length >= 2 with strictly positive net
    growth. A tail property can only be sampled on a window; the surrogate is
    flagged as such.
    """
    ly = model.lyapunov
    if ly is None:
        raise MissingLyapunovData("model has no Lyapunov data")
    n = model.n_states
    in_K = np.zeros(n, dtype=bool)
    in_K[ly.K] = True
    log_C = float(np.log(ly.C))
    slack = np.empty(n)
    for i in range(n):
        lhs = _drift_lhs_log(model, i)
        rate = ly.gamma if ly.gamma is not None else float(ly.ell[i])
        decay = -rate + ly.log_W[i]
        rhs = np.logaddexp(log_C, decay) if in_K[i] else decay
        slack[i] = rhs - lhs
    worst = int(slack.argmin())
    passed = bool(slack[worst] > LYAPUNOV_SLACK_PASS)

    norm_like = None
    gamma_check = None
    if ly.case == "unbounded":
        d = np.array([float(ly.ell[i] - model.cost[i].max()) for i in range(n)])
        tail_start = n - 1
        for m in range(n - 2, -1, -1):
            if d[m + 1] >= d[m] - 1e-12:
                tail_start = m
            else:
                break
        # weak monotonicity: a constant tail is indistinguishable from slow
        # growth on a finite window, so only a decreasing tail fails
        tail_ok = n == 1 or tail_start <= n - 2
        norm_like = {
            "surrogate": "nondecreasing tail (finite window)",
            "tail_start": int(tail_start),
            "net_growth": float(d[n - 1] - d[tail_start]),
            "passed": bool(tail_ok),
        }
        passed = passed and tail_ok
    else:
        cmax = max(float(model.cost[i].max()) for i in range(n))
        ok = ly.gamma > cmax
        gamma_check = {"gamma": float(ly.gamma), "max_cost": cmax, "passed": bool(ok)}
        passed = passed and ok

    return LyapunovReport(
        case=ly.case,
        passed=passed,
        slack=slack,
        worst_state=worst,
        norm_like=norm_like,
        gamma_check=gamma_check,
    )


# ---------------------------------------------------------------------------
# irreducibility and reference state


@dataclass
class IrreducibilityReport:
    mode: str
    passed: bool
    guarantee: str
    failing_pair: dict | None = None
    samples: int = 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "guarantee": self.guarantee,
            "failing_pair": self.failing_pair,
            "samples": self.samples,
        }


def _strongly_connected(edges: np.ndarray, n: int) -> bool:
    g = csr_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    ncomp, _ = connected_components(g, directed=True, connection="strong")
    return ncomp == 1


def check_irreducibility(model: GameModel, mode: str = "sufficient",
                         samples: int = 50, seed: int = 0) -> IrreducibilityReport:
    """Graph conditions for irreducibility under every stationary pair.

    sufficient: keep edge i->j only when P(j|i,u,v) > 0 for every pure
    (u,v); strong connectivity of that graph implies irreducibility under
    every strategy pair. sampled: falsifier only, checks strong connectivity
    of the support graph under `samples` random pure stationary pairs.
    """
    n = model.n_states
    if mode == "sufficient":
        edges = []
        for i in range(n):
            minrow = model.transition[i].min(axis=(0, 1))
            for j in np.nonzero(minrow > 0)[0]:
                edges.append((i, j))
        ok = bool(edges) and _strongly_connected(np.asarray(edges), n)
        return IrreducibilityReport(
            mode=mode,
            passed=ok,
            guarantee=("irreducible under every stationary strategy pair"
                       if ok else "sufficient condition failed; no conclusion"),
        )
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        for s in range(samples):
            pick1 = [int(rng.integers(model.n_actions(i)[0])) for i in range(n)]
            pick2 = [int(rng.integers(model.n_actions(i)[1])) for i in range(n)]
            edges = []
            for i in range(n):
                row = model.transition[i][pick1[i], pick2[i]]
                for j in np.nonzero(row > 0)[0]:
                    edges.append((i, j))
            if not edges or not _strongly_connected(np.asarray(edges), n):
                return IrreducibilityReport(
                    mode=mode,
                    passed=False,
                    guarantee="reducible under a sampled pure pair",
                    failing_pair={"p1": pick1, "p2": pick2},
                    samples=s + 1,
                )
        return IrreducibilityReport(
            mode=mode,
            passed=True,
            guarantee=f"no failure among {samples} sampled pure pairs (not a proof)",
            samples=samples,
        )
    raise ModelError(f"unknown mode {mode!r}")


def check_reference_state(model: GameModel) -> bool:
    """True iff every pure (u,v) at i0 reaches every other window state in one step."""
    i0 = model.i0
    P = model.transition[i0]
    others = [j for j in range(model.n_states) if j != i0]
    if not others:
        return True
    return bool(P[:, :, others].min() > 0)


# ---------------------------------------------------------------------------
# JSON ingestion / emission

_TOP_KEYS = {"states", "actions_p1", "actions_p2", "transition", "cost", "theta", "i0", "lyapunov"}
_LYAP_KEYS = {"W", "logW", "gamma", "ell", "K", "C"}


def model_from_json(doc) -> GameModel:
    """Build a model from the interchange document (dict or JSON text).

    Transition records are {i,u,v,j,p} with u,v as 0-based indices into the
    state's action lists; missing records mean zero mass / zero cost. The
    Lyapunov block accepts exactly one of `W` (linear) or `logW`; the log
    form exists because realistic weight functions overflow float64.
    Unknown keys anywhere are rejected.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown keys: {sorted(unknown)}")
    for req in ("states", "actions_p1", "actions_p2", "transition", "cost", "i0"):
        if req not in doc:
            raise SchemaError(f"missing key: {req}")
    n = int(doc["states"])
    a1 = doc["actions_p1"]
    a2 = doc["actions_p2"]
    if len(a1) != n or len(a2) != n:
        raise SchemaError("actions_p1/actions_p2 must list actions for every state")
    transition = []
    cost = []
    for i in range(n):
        mu, mv = len(a1[i]), len(a2[i])
        transition.append(np.zeros((mu, mv, n)))
        cost.append(np.zeros((mu, mv)))
    for rec in doc["transition"]:
        extra = set(rec) - {"i", "u", "v", "j", "p"}
        if extra:
            raise SchemaError(f"unknown keys in transition record: {sorted(extra)}")
        i, u, v, j = int(rec["i"]), int(rec["u"]), int(rec["v"]), int(rec["j"])
        if not (0 <= i < n and 0 <= j < n):
            raise SchemaError(f"transition record references state outside window: {rec}")
        if not (0 <= u < len(a1[i]) and 0 <= v < len(a2[i])):
            raise SchemaError(f"transition record references missing action: {rec}")
        transition[i][u, v, j] = float(rec["p"])
    for rec in doc["cost"]:
        extra = set(rec) - {"i", "u", "v", "c"}
        if extra:
            raise SchemaError(f"unknown keys in cost record: {sorted(extra)}")
        i, u, v = int(rec["i"]), int(rec["u"]), int(rec["v"])
        if not (0 <= i < n):
            raise SchemaError(f"cost record references state outside window: {rec}")
        if not (0 <= u < len(a1[i]) and 0 <= v < len(a2[i])):
            raise SchemaError(f"cost record references missing action: {rec}")
        cost[i][u, v] = float(rec["c"])
    lyap = None
    if doc.get("lyapunov") is not None:
        lb = doc["lyapunov"]
        unknown = set(lb) - _LYAP_KEYS
        if unknown:
            raise SchemaError(f"unknown keys in lyapunov: {sorted(unknown)}")
        if ("W" in lb) == ("logW" in lb):
            raise SchemaError("lyapunov needs exactly one of W or logW")
        log_W = (np.log(np.asarray(lb["W"], dtype=float))
                 if "W" in lb else np.asarray(lb["logW"], dtype=float))
        if ("gamma" in lb) == ("ell" in lb):
            raise SchemaError("lyapunov needs exactly one of gamma or ell")
        lyap = LyapunovData(
            log_W=log_W,
            C=float(lb["C"]),
            K=np.asarray(lb["K"], dtype=int),
            gamma=float(lb["gamma"]) if "gamma" in lb else None,
            ell=np.asarray(lb["ell"], dtype=float) if "ell" in lb else None,
        )
    return make_model(
        n_states=n,
        actions_p1=a1,
        actions_p2=a2,
        transition=transition,
        cost=cost,
        theta=float(doc.get("theta", 1.0)),
        i0=int(doc["i0"]),
        lyapunov=lyap,
    )


def model_to_json(model: GameModel) -> dict:
    """Emit the interchange document. Costs are written already theta-scaled
    with theta set to 1 so a round trip reproduces the internal tensors."""
    transition = []
    cost = []
    for i in range(model.n_states):
        P = model.transition[i]
        C = model.cost[i]
        mu, mv = model.n_actions(i)
        for u in range(mu):
            for v in range(mv):
                for j in np.nonzero(P[u, v])[0]:
                    transition.append({"i": i, "u": u, "v": v, "j": int(j), "p": float(P[u, v, j])})
                if C[u, v] != 0.0:
                    cost.append({"i": i, "u": u, "v": v, "c": float(C[u, v])})
    doc = {
        "states": model.n_states,
        "actions_p1": [list(map(float, a)) for a in model.actions_p1],
        "actions_p2": [list(map(float, a)) for a in model.actions_p2],
        "transition": transition,
        "cost": cost,
        "theta": 1.0,
        "i0": model.i0,
    }
    if model.lyapunov is not None:
        ly = model.lyapunov
        block = {
            "logW": [float(x) for x in ly.log_W],
            "K": [int(k) for k in ly.K],
            "C": float(ly.C),
        }
        if ly.gamma is not None:
            block["gamma"] = float(ly.gamma)
        else:
            block["ell"] = [float(x) for x in ly.ell]
        doc["lyapunov"] = block
    return doc

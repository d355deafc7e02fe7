"""Finite Markov decision process primitives.

Dense tabular MDPs with right-stochastic per-action transition matrices.
Provides transition validation, the matrix norms used by the error analysis,
the discounted resolvent (I - gamma*P)^-1, the per-(action, state) feature
rows whose nonnegative inner products with a reward vector certify that the
designated action is Bellman optimal in every state, policy evaluation,
Q values, and a value-iteration oracle used to cross-check optimality claims.

All values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-12
RESOLVENT_TOL = 1e-9
ZERO_ROW_TOL = 1e-12
VALUE_ITERATION_CAP = 10**6

PROVENANCE_EXACT = "exact"
PROVENANCE_ESTIMATED = "estimated"


class DimensionMismatch(ValueError):
    """Raw transition array has an inconsistent or unsupported shape."""


class NegativeEntry(ValueError):
    """A transition probability is negative."""

    def __init__(self, action: int, row: int, col: int, value: float):
        super().__init__(f"P[{action}][{row}][{col}] = {value} is negative")
        self.action = action
        self.row = row
        self.col = col
        self.value = value


class RowSumViolation(ValueError):
    """A transition row does not sum to one."""

    def __init__(self, action: int, row: int, actual_sum: float):
        super().__init__(
            f"row {row} of action {action} sums to {actual_sum}, expected 1"
        )
        self.action = action
        self.row = row
        self.actual_sum = actual_sum


class SingularSystem(RuntimeError):
    """A linear solve failed; impossible for valid inputs, kept as a guard."""


class NonConvergence(RuntimeError):
    """Value iteration hit its iteration cap before reaching a fixed point."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TransitionModel:
    """k right-stochastic n-by-n matrices; build via validate_transition_model."""

    n: int
    k: int
    p: np.ndarray  # shape (k, n, n), p[a][i][j] = P(i -> j | action a)


@dataclass(frozen=True)
class Mdp:
    """Transition model plus discount factor and the designated optimal action.

    gamma must lie in [0, 1): the discounted resolvent and every error bound
    divide by (1 - gamma).
    """

    transitions: TransitionModel
    gamma: float
    optimal_action: int = 0

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not (0 <= self.optimal_action < self.transitions.k):
            raise ValueError(
                f"optimal_action {self.optimal_action} out of range "
                f"[0, {self.transitions.k})"
            )

    @property
    def n(self) -> int:
        return self.transitions.n

    @property
    def k(self) -> int:
        return self.transitions.k

    @property
    def p(self) -> np.ndarray:
        return self.transitions.p


@dataclass(frozen=True)
class FeatureRows:
    """Ordered feature rows, one per (non-optimal action, state) pair.

    Row for pair (a, i) is (P_a1(i) - P_a(i)) @ (I - gamma*P_a1)^-1 where a1
    is the designated optimal action.  Rows derived from right-stochastic
    transitions sum to zero, because the resolvent maps the all-ones vector
    to 1/(1-gamma) times itself.  Ad-hoc row sets (arbitrary point clouds for
    classification) can be wrapped with from_rows and need not sum to zero.
    """

    pairs: tuple[tuple[int, int], ...]
    matrix: np.ndarray  # shape (len(pairs), n)
    provenance: str = PROVENANCE_EXACT
    zero_rows: tuple[tuple[int, int], ...] = field(default=())

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> list[tuple[tuple[int, int], np.ndarray]]:
        return list(zip(self.pairs, self.matrix))

    @classmethod
    def from_rows(cls, rows, pairs=None, provenance: str = PROVENANCE_EXACT):
        """Wrap an arbitrary stack of row vectors; pairs default to (1, i)."""
        matrix = np.atleast_2d(np.asarray(rows, dtype=float))
        if pairs is None:
            pairs = tuple((1, i) for i in range(matrix.shape[0]))
        else:
            pairs = tuple((int(a), int(i)) for a, i in pairs)
        if len(pairs) != matrix.shape[0]:
            raise ValueError("one (action, state) pair required per row")
        zero = tuple(
            pairs[r]
            for r in range(matrix.shape[0])
            if np.abs(matrix[r]).max(initial=0.0) < ZERO_ROW_TOL
        )
        return cls(pairs, _readonly(matrix), provenance, zero)


def validate_transition_model(p_raw) -> TransitionModel:
    """Check that p_raw is a stack of k >= 2 right-stochastic n-by-n matrices.

    Entries are taken as given; no renormalization is applied.
    """
    arr = np.asarray(p_raw, dtype=float)
    if arr.ndim != 3:
        raise DimensionMismatch(f"expected a k x n x n array, got shape {arr.shape}")
    k, n, n2 = arr.shape
    if n != n2:
        raise DimensionMismatch(f"transition matrices must be square, got {n}x{n2}")
    if n < 1:
        raise DimensionMismatch("need at least one state")
    if k < 2:
        raise DimensionMismatch(f"need at least two actions, got {k}")
    for a in range(k):
        for i in range(n):
            row = arr[a, i]
            neg = np.flatnonzero(row < 0.0)
            if neg.size:
                j = int(neg[0])
                raise NegativeEntry(a, i, j, float(row[j]))
            s = float(row.sum())
            if not abs(s - 1.0) <= ROW_SUM_TOL:  # also catches NaN/inf
                raise RowSumViolation(a, i, s)
    return TransitionModel(n=n, k=k, p=_readonly(arr))


def matrix_sup_norm(a) -> float:
    """Largest absolute entry of a matrix (or vector)."""
    arr = np.asarray(a, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.abs(arr).max())


def induced_row_norm(a) -> float:
    """Max-over-rows L1 norm; equals 1 for any right-stochastic matrix."""
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if arr.size == 0:
        return 0.0
    return float(np.abs(arr).sum(axis=1).max())


def discounted_resolvent(p, gamma: float) -> np.ndarray:
    """(I - gamma*P)^-1 by direct linear solve, verified to 1e-9 per entry."""
    p = np.asarray(p, dtype=float)
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    n = p.shape[0]
    eye = np.eye(n)
    try:
        m = np.linalg.solve(eye - gamma * p, eye)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"resolvent solve failed: {exc}") from exc
    residual = matrix_sup_norm((eye - gamma * p) @ m - eye)
    if residual > RESOLVENT_TOL:
        raise SingularSystem(f"resolvent residual {residual} exceeds {RESOLVENT_TOL}")
    return m


def feature_rows(mdp: Mdp, provenance: str = PROVENANCE_EXACT) -> FeatureRows:
    """All (k-1)*n feature rows, ordered by (action ascending, state ascending).

    All-zero rows (identical transition rows for two actions, possible with
    estimated matrices) are flagged with a warning rather than rejected so
    that downstream solvers stay total on empirical data.
    """
    a1 = mdp.optimal_action
    resolvent = discounted_resolvent(mdp.p[a1], mdp.gamma)
    pairs = []
    rows = []
    for a in range(mdp.k):
        if a == a1:
            continue
        diff = mdp.p[a1] - mdp.p[a]  # row i is P_a1(i) - P_a(i)
        block = diff @ resolvent
        for i in range(mdp.n):
            pairs.append((a, i))
            rows.append(block[i])
    matrix = np.vstack(rows)
    zero = tuple(
        pairs[r] for r in range(len(pairs)) if np.abs(matrix[r]).max() < ZERO_ROW_TOL
    )
    if zero:
        warnings.warn(
            f"all-zero feature rows for (action, state) pairs {list(zero)}; "
            "these actions are indistinguishable from the optimal one",
            RuntimeWarning,
            stacklevel=2,
        )
    return FeatureRows(tuple(pairs), _readonly(matrix), provenance, zero)


def _as_reward(r, n: int) -> np.ndarray:
    arr = np.asarray(r, dtype=float).reshape(-1)
    if arr.shape[0] != n:
        raise ValueError(f"reward length {arr.shape[0]} does not match n={n}")
    if not np.isfinite(arr).all():
        raise ValueError("reward entries must be finite")
    return arr


def value_of_policy(mdp: Mdp, policy, r) -> np.ndarray:
    """V = (I - gamma*P_pi)^-1 r for the deterministic policy pi."""
    pol = np.asarray(policy, dtype=int).reshape(-1)
    if pol.shape[0] != mdp.n:
        raise ValueError("policy must assign one action per state")
    if pol.min(initial=0) < 0 or pol.max(initial=0) >= mdp.k:
        raise ValueError(f"policy actions must lie in [0, {mdp.k})")
    reward = _as_reward(r, mdp.n)
    p_pi = mdp.p[pol, np.arange(mdp.n)]
    try:
        return np.linalg.solve(np.eye(mdp.n) - mdp.gamma * p_pi, reward)
    except np.linalg.LinAlgError as exc:  # unreachable for gamma < 1
        raise SingularSystem(f"policy evaluation failed: {exc}") from exc


def q_values(mdp: Mdp, v, r) -> np.ndarray:
    """Q[s, a] = r[s] + gamma * P_a(s) . v, shape (n, k)."""
    value = np.asarray(v, dtype=float).reshape(-1)
    reward = _as_reward(r, mdp.n)
    if value.shape[0] != mdp.n:
        raise ValueError("value vector length must match n")
    # (k, n, n) @ (n,) -> (k, n); transpose to (n, k)
    return reward[:, None] + mdp.gamma * (mdp.p @ value).T


def bellman_margin(f: FeatureRows, r) -> tuple[float, tuple[int, int]]:
    """Smallest feature-row inner product with r, and the achieving pair.

    A nonnegative minimum certifies that the designated action is Bellman
    optimal under r; the caller supplies the tolerance for that judgement.
    """
    if f.matrix.shape[0] == 0:
        raise ValueError("feature row set is empty")
    reward = _as_reward(r, f.n)
    margins = f.matrix @ reward
    idx = int(np.argmin(margins))
    return float(margins[idx]), f.pairs[idx]


def optimal_policy_oracle(mdp: Mdp, r, tol: float = 1e-10):
    """Value iteration to a fixed point; reports whether a1 attains every max.

    Iterates until the sup-norm Bellman update shrinks below tol*(1-gamma)/gamma
    (any positive threshold for gamma = 0, where one sweep is exact), with ties
    broken toward the lowest action index.  Returns (policy, is_a1_optimal)
    where the flag is true iff the designated action's Q value is within tol of
    the maximum at every state.
    """
    reward = _as_reward(r, mdp.n)
    gamma = mdp.gamma
    threshold = tol if gamma == 0.0 else tol * (1.0 - gamma) / gamma
    v = np.zeros(mdp.n)
    for _ in range(VALUE_ITERATION_CAP):
        q = reward[:, None] + gamma * (mdp.p @ v).T
        v_next = q.max(axis=1)
        if np.abs(v_next - v).max() < threshold:
            v = v_next
            break
        v = v_next
    else:
        raise NonConvergence(
            f"value iteration did not converge within {VALUE_ITERATION_CAP} sweeps"
        )
    q = reward[:, None] + gamma * (mdp.p @ v).T
    policy = q.argmax(axis=1)  # argmax returns the lowest maximizing index
    is_a1_optimal = bool(np.all(q[:, mdp.optimal_action] >= q.max(axis=1) - tol))
    return policy, is_a1_optimal


def mdp_to_dict(mdp: Mdp) -> dict:
    """JSON-ready form: {"n", "k", "gamma", "optimal_action", "transitions"}."""
    return {
        "n": mdp.n,
        "k": mdp.k,
        "gamma": mdp.gamma,
        "optimal_action": mdp.optimal_action,
        "transitions": mdp.p.tolist(),
    }


def mdp_from_dict(data: dict) -> Mdp:
    model = validate_transition_model(data["transitions"])
    if model.n != int(data["n"]) or model.k != int(data["k"]):
        raise DimensionMismatch(
            f"declared sizes n={data['n']}, k={data['k']} do not match "
            f"transitions of shape {model.p.shape}"
        )
    return Mdp(
        transitions=model,
        gamma=float(data["gamma"]),
        optimal_action=int(data.get("optimal_action", 0)),
    )

"""Reward recovery and geometric analysis for finite-state IRL.

Treat the feature rows as a point cloud in R^n.  A reward R that keeps every
inner product F_ai . R nonnegative makes the designated action optimal, so
reward recovery is the search for a hyperplane through the origin with all
points on one side.  Three mutually exclusive regimes follow from where the
origin sits relative to the convex hull of the points:

* separable (origin outside the hull): some direction has strictly positive
  margin on every row, so strictly optimal rewards exist;
* boundary (origin on the hull boundary): nonzero one-sided directions exist
  but every one of them touches a row, so only non-strict rewards exist;
* interior (origin inside the hull): the zero reward is the only one-sided
  choice.

Two recovery methods are provided.  The minimum-L1 hard-margin program
(one-class SVM with hard margins) minimizes ||R||_1 subject to F_ai . R >= 1;
its optimum equals 1/beta where beta is the best strict-separation margin on
the unit L1 sphere, which is what makes the estimation error analysis work.
The linear-programming baseline maximizes the sum over states of the worst
per-action margin minus lambda * ||R||_1 inside the box ||R||_inf <= r_max,
subject to all margins being nonnegative.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .mdp import FeatureRows, ZERO_ROW_TOL
from .simplex import (
    EQUAL,
    GREATER_EQUAL,
    LESS_EQUAL,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    LpSolution,
    NumericalBreakdown,
    check_feasible,
    solve,
)

METHOD_L1_SVM = "l1svm"
METHOD_LP_IRL = "lp_irl"

STRICTNESS_TOL = 1e-8  # default tau for regime boundary decisions
_CERT_BETA_FLOOR = 1e-12  # below this the certificate reports beta = 0


class RegimeLabel(enum.Enum):
    REGIME_1 = "Regime1"
    REGIME_2 = "Regime2"
    REGIME_3 = "Regime3"


class InfeasibleProblem(RuntimeError):
    """The hard-margin constraints admit no reward (instance not separable)."""


class ZeroFeatureRow(ValueError):
    """A feature row is numerically zero where the analysis forbids it."""

    def __init__(self, action: int, state: int):
        super().__init__(f"feature row for (action={action}, state={state}) is zero")
        self.action = action
        self.state = state


@dataclass(frozen=True)
class SeparabilityCertificate:
    """Best strict-separation margin beta over rewards with unit L1 norm.

    When beta > 0, r_star has L1 norm 1 and every row satisfies
    F_ai . r_star >= beta; beta of zero means no strictly separating reward
    exists and r_star is None.
    """

    beta: float
    r_star: np.ndarray | None = None


@dataclass(frozen=True)
class SolverReport:
    method: str
    reward: np.ndarray
    objective_value: float
    l1_norm: float
    lam: float | None = None
    r_max: float | None = None
    feasible: bool = True

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "reward": self.reward.tolist(),
            "objective": self.objective_value,
            "l1_norm": self.l1_norm,
            "lambda": self.lam,
            "r_max": self.r_max,
            "feasible": self.feasible,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolverReport":
        return cls(
            method=data["method"],
            reward=np.asarray(data["reward"], dtype=float),
            objective_value=float(data["objective"]),
            l1_norm=float(data["l1_norm"]),
            lam=None if data.get("lambda") is None else float(data["lambda"]),
            r_max=None if data.get("r_max") is None else float(data["r_max"]),
            feasible=bool(data["feasible"]),
        )


def _require_rows(f: FeatureRows) -> np.ndarray:
    if f.matrix.shape[0] == 0:
        raise ValueError("feature row set is empty")
    return f.matrix


def _reject_zero_rows(f: FeatureRows) -> np.ndarray:
    matrix = _require_rows(f)
    norms = np.abs(matrix).max(axis=1)
    bad = np.flatnonzero(norms < ZERO_ROW_TOL)
    if bad.size:
        a, i = f.pairs[int(bad[0])]
        raise ZeroFeatureRow(a, i)
    return matrix


def solve_l1_svm(f_hat: FeatureRows) -> SolverReport:
    """Minimize ||R||_1 subject to F_ai . R >= 1 on every row.

    The reward is split R = u - v with u, v >= 0 and sum(u + v) minimized.
    Raises InfeasibleProblem when no reward satisfies the margins, which
    signals that the (estimated) instance is not strictly separable.
    """
    matrix = _require_rows(f_hat)
    nrows, n = matrix.shape
    c = np.ones(2 * n)
    constraints = [
        (np.concatenate([matrix[r], -matrix[r]]), GREATER_EQUAL, 1.0)
        for r in range(nrows)
    ]
    lp = LinearProgram.build(c, constraints, bounds=[(0.0, None)] * (2 * n))
    sol = solve(lp)
    if sol.status != OPTIMAL:
        # the objective is bounded below by zero, so only infeasibility remains
        raise InfeasibleProblem(
            "no reward satisfies the unit-margin constraints; "
            "the instance is not strictly separable"
        )
    reward = sol.x[:n] - sol.x[n:]
    return SolverReport(
        method=METHOD_L1_SVM,
        reward=reward,
        objective_value=float(sol.objective_value),
        l1_norm=float(np.abs(reward).sum()),
        feasible=True,
    )


def solve_lp_irl(f_hat: FeatureRows, lam: float = 1.0, r_max: float = 1.0) -> SolverReport:
    """Maximize sum_i min_a F_ai . R - lam * ||R||_1 with margins >= 0, |R| <= r_max.

    Linearized with one auxiliary t_i below every margin of state i and one
    z_j above |R_j|.  Always feasible (R = 0 satisfies every constraint).
    """
    matrix = _require_rows(f_hat)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    n = matrix.shape[1]
    states = sorted({i for _, i in f_hat.pairs})
    t_index = {s: j for j, s in enumerate(states)}
    nt = len(states)
    nv = n + nt + n  # [R, t, z]
    c = np.concatenate([np.zeros(n), -np.ones(nt), lam * np.ones(n)])
    constraints = []
    for (_, i), row in zip(f_hat.pairs, matrix):
        margin = np.zeros(nv)
        margin[:n] = row
        margin[n + t_index[i]] = -1.0
        constraints.append((margin, GREATER_EQUAL, 0.0))  # F_ai . R >= t_i
        nonneg = np.zeros(nv)
        nonneg[:n] = row
        constraints.append((nonneg, GREATER_EQUAL, 0.0))  # F_ai . R >= 0
    for j in range(n):
        above = np.zeros(nv)
        above[j] = -1.0
        above[n + nt + j] = 1.0
        constraints.append((above, GREATER_EQUAL, 0.0))  # z_j >= R_j
        below = np.zeros(nv)
        below[j] = 1.0
        below[n + nt + j] = 1.0
        constraints.append((below, GREATER_EQUAL, 0.0))  # z_j >= -R_j
    bounds = (
        [(-r_max, r_max)] * n + [(None, None)] * nt + [(0.0, r_max)] * n
    )
    sol = solve(LinearProgram.build(c, constraints, bounds=bounds))
    if sol.status != OPTIMAL:  # R = 0 is feasible and the box bounds everything
        raise NumericalBreakdown(f"margin-sum program returned {sol.status}")
    reward = sol.x[:n]
    return SolverReport(
        method=METHOD_LP_IRL,
        reward=reward,
        objective_value=float(-sol.objective_value),
        l1_norm=float(np.abs(reward).sum()),
        lam=float(lam),
        r_max=float(r_max),
        feasible=True,
    )


def beta_certificate(f: FeatureRows) -> SeparabilityCertificate:
    """Maximize beta subject to F_ai . R >= beta and ||R||_1 <= 1.

    With R split into u - v the norm cap becomes sum(u + v) <= 1, which is
    active at any optimum with beta > 0, so the relaxation is exact.  A
    non-positive optimum is reported as beta = 0 with no witness.
    """
    matrix = _reject_zero_rows(f)
    nrows, n = matrix.shape
    c = np.zeros(2 * n + 1)
    c[-1] = -1.0  # maximize beta
    constraints = [
        (np.concatenate([matrix[r], -matrix[r], [-1.0]]), GREATER_EQUAL, 0.0)
        for r in range(nrows)
    ]
    cap = np.concatenate([np.ones(2 * n), [0.0]])
    constraints.append((cap, LESS_EQUAL, 1.0))
    bounds = [(0.0, None)] * (2 * n) + [(None, None)]
    sol = solve(LinearProgram.build(c, constraints, bounds=bounds))
    if sol.status != OPTIMAL:  # beta <= max row norm, so never unbounded
        raise NumericalBreakdown(f"margin program returned {sol.status}")
    beta_lp = float(sol.x[-1])
    if beta_lp <= _CERT_BETA_FLOOR:
        return SeparabilityCertificate(beta=0.0, r_star=None)
    r = sol.x[:n] - sol.x[n : 2 * n]
    norm = float(np.abs(r).sum())
    if norm <= 0.0:
        return SeparabilityCertificate(beta=0.0, r_star=None)
    r_star = r / norm
    beta = float((matrix @ r_star).min())
    if beta <= _CERT_BETA_FLOOR:
        return SeparabilityCertificate(beta=0.0, r_star=None)
    return SeparabilityCertificate(beta=beta, r_star=r_star)


def _one_sided_direction_exists(matrix: np.ndarray) -> bool:
    # The cone {w : F w >= 0} contains a nonzero point iff it contains one
    # with some coordinate pinned to +1 or -1.
    nrows, n = matrix.shape
    for j in range(n):
        for sign in (1.0, -1.0):
            constraints = [
                (np.concatenate([matrix[r], -matrix[r]]), GREATER_EQUAL, 0.0)
                for r in range(nrows)
            ]
            pin = np.zeros(2 * n)
            pin[j] = sign
            pin[n + j] = -sign
            constraints.append((pin, EQUAL, 1.0))
            lp = LinearProgram.build(
                np.zeros(2 * n), constraints, bounds=[(0.0, None)] * (2 * n)
            )
            if check_feasible(lp):
                return True
    return False


def classify_regime(f: FeatureRows, tau: float = STRICTNESS_TOL) -> RegimeLabel:
    """Place the instance in one of the three geometric regimes.

    Separable (Regime3) iff the best unit-L1 margin exceeds tau; otherwise
    boundary (Regime2) iff some nonzero direction keeps every row nonnegative;
    otherwise interior (Regime1).  tau makes the numerically unstable boundary
    decision explicit: exact classification on the boundary is impossible in
    floating point.
    """
    matrix = _reject_zero_rows(f)
    if beta_certificate(f).beta > tau:
        return RegimeLabel.REGIME_3
    if _one_sided_direction_exists(matrix):
        return RegimeLabel.REGIME_2
    return RegimeLabel.REGIME_1

"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Small and deterministic rather than fast: every optimization problem in this
package has a few dozen rows and columns.  General constraints (<=, >=, =),
per-variable bounds including free variables (handled by the x = x+ - x-
split), infeasibility via phase one, unboundedness via the ratio test.

Tolerances: pivots below 1e-12 are treated as zero, reduced costs within
1e-9 of zero as optimal, and a phase-one residual above 1e-8 as infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12
DUAL_TOL = 1e-9
FEAS_TOL = 1e-8
MAX_PIVOTS = 100_000

LESS_EQUAL = "<="
GREATER_EQUAL = ">="
EQUAL = "="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class NumericalBreakdown(RuntimeError):
    """No usable pivot or an impossible tableau state was reached."""


@dataclass(frozen=True)
class LinearProgram:
    """minimize c . x  subject to  a x (<=|>=|=) b  and  lower <= x <= upper.

    Bounds may be -inf/+inf; coefficients and right-hand sides must be finite.
    """

    c: np.ndarray
    a: np.ndarray
    relations: tuple[str, ...]
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def build(cls, c, constraints, bounds=None) -> "LinearProgram":
        """constraints: iterable of (row, relation, rhs); bounds: (lo, hi) pairs
        with None for unbounded, default (None, None) for every variable."""
        c = np.asarray(c, dtype=float).reshape(-1)
        nvar = c.shape[0]
        rows, rels, rhs = [], [], []
        for row, rel, val in constraints:
            row = np.asarray(row, dtype=float).reshape(-1)
            if row.shape[0] != nvar:
                raise ValueError("constraint row length does not match objective")
            if rel not in (LESS_EQUAL, GREATER_EQUAL, EQUAL):
                raise ValueError(f"unknown relation {rel!r}")
            rows.append(row)
            rels.append(rel)
            rhs.append(float(val))
        a = np.vstack(rows) if rows else np.zeros((0, nvar))
        b = np.asarray(rhs, dtype=float)
        if bounds is None:
            bounds = [(None, None)] * nvar
        lower = np.array([-np.inf if lo is None else float(lo) for lo, _ in bounds])
        upper = np.array([np.inf if hi is None else float(hi) for _, hi in bounds])
        if lower.shape[0] != nvar:
            raise ValueError("one bound pair required per variable")
        if not (np.isfinite(c).all() and np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("objective, rows and right-hand sides must be finite")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        return cls(c, a, tuple(rels), b, lower, upper)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective_value: float | None = None


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    tab[:, col] = 0.0
    tab[row, col] = 1.0
    basis[row] = col


def _run_phase(tab, basis, cost, allowed) -> str:
    ncols = tab.shape[1] - 1
    for _ in range(MAX_PIVOTS):
        reduced = cost - cost[basis] @ tab[:, :ncols]
        reduced[~allowed] = 0.0
        candidates = np.flatnonzero(reduced < -DUAL_TOL)
        if candidates.size == 0:
            return OPTIMAL
        col = int(candidates[0])  # Bland: lowest eligible column index
        colvals = tab[:, col]
        eligible = np.flatnonzero(colvals > PIVOT_TOL)
        if eligible.size == 0:
            return UNBOUNDED
        ratios = tab[eligible, ncols] / colvals[eligible]
        best = ratios.min()
        ties = eligible[ratios <= best + 1e-9]
        row = int(ties[np.argmin(basis[ties])])  # Bland: lowest basic index
        _pivot(tab, basis, row, col)
    raise NumericalBreakdown("pivot limit exceeded")


class _Standardized:
    """Equality-form tableau plus the mapping back to the original variables."""

    def __init__(self, lp: LinearProgram):
        ncon, nvar = lp.a.shape
        shift = np.zeros(nvar)
        columns = []  # standardized structural columns of the constraint matrix
        col_cost = []
        col_map = []  # (original var, sign) per standardized column
        extra_rows = []  # (column index, upper value) for two-sided bounds
        for j in range(nvar):
            lo, hi = lp.lower[j], lp.upper[j]
            aj = lp.a[:, j] if ncon else np.zeros(0)
            if np.isfinite(lo):
                shift[j] = lo  # x = lo + y
                columns.append(aj)
                col_cost.append(lp.c[j])
                col_map.append((j, 1.0))
                if np.isfinite(hi):
                    extra_rows.append((len(columns) - 1, hi - lo))
            elif np.isfinite(hi):
                shift[j] = hi  # x = hi - y
                columns.append(-aj)
                col_cost.append(-lp.c[j])
                col_map.append((j, -1.0))
            else:  # free: x = y+ - y-
                columns.append(aj)
                col_cost.append(lp.c[j])
                col_map.append((j, 1.0))
                columns.append(-aj)
                col_cost.append(-lp.c[j])
                col_map.append((j, -1.0))
        nstruct = len(columns)
        a = np.column_stack(columns) if ncon else np.zeros((0, nstruct))
        b = lp.b - (lp.a @ shift if ncon else 0.0)
        rels = list(lp.relations)
        for col, ub in extra_rows:
            row = np.zeros(nstruct)
            row[col] = 1.0
            a = np.vstack([a, row])
            b = np.append(b, ub)
            rels.append(LESS_EQUAL)

        # Normal form: <= rows with b >= 0 start on their slack, >= rows with
        # b > 0 need surplus plus artificial, = rows need an artificial.
        for r in range(len(rels)):
            if rels[r] == GREATER_EQUAL:
                a[r] *= -1.0
                b[r] = -b[r]
                rels[r] = LESS_EQUAL
        for r in range(len(rels)):
            if b[r] < 0.0:
                a[r] *= -1.0
                b[r] = -b[r]
                if rels[r] == LESS_EQUAL:
                    rels[r] = GREATER_EQUAL

        nrows = len(rels)
        slack_cols = {}
        surplus_cols = {}
        ncols = nstruct
        for r in range(nrows):
            if rels[r] == LESS_EQUAL:
                slack_cols[r] = ncols
                ncols += 1
            elif rels[r] == GREATER_EQUAL:
                surplus_cols[r] = ncols
                ncols += 1
        art_start = ncols
        art_rows = [r for r in range(nrows) if rels[r] != LESS_EQUAL]
        ncols += len(art_rows)

        tab = np.zeros((nrows, ncols + 1))
        tab[:, :nstruct] = a
        tab[:, ncols] = b
        basis = np.empty(nrows, dtype=int)
        for r, cidx in slack_cols.items():
            tab[r, cidx] = 1.0
            basis[r] = cidx
        for r, cidx in surplus_cols.items():
            tab[r, cidx] = -1.0
        for offset, r in enumerate(art_rows):
            cidx = art_start + offset
            tab[r, cidx] = 1.0
            basis[r] = cidx

        self.tab = tab
        self.basis = basis
        self.nstruct = nstruct
        self.art_start = art_start
        self.ncols = ncols
        self.struct_cost = np.asarray(col_cost, dtype=float)
        self.col_map = col_map
        self.shift = shift
        self.nvar = nvar

    def phase_one(self) -> bool:
        """Minimize the artificial sum; True iff the program is feasible."""
        if self.art_start == self.ncols:
            return True  # no artificials: the all-slack basis is feasible
        cost = np.zeros(self.ncols)
        cost[self.art_start :] = 1.0
        allowed = np.ones(self.ncols, dtype=bool)
        status = _run_phase(self.tab, self.basis, cost, allowed)
        if status != OPTIMAL:  # the artificial sum is bounded below by zero
            raise NumericalBreakdown("phase one reported an unbounded objective")
        residual = cost[self.basis] @ self.tab[:, self.ncols]
        if residual > FEAS_TOL:
            return False
        self._remove_artificials()
        return True

    def _remove_artificials(self) -> None:
        keep = []
        for r in range(self.tab.shape[0]):
            if self.basis[r] < self.art_start:
                keep.append(r)
                continue
            row = self.tab[r, : self.art_start]
            nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if nz.size:
                _pivot(self.tab, self.basis, r, int(nz[0]))
                keep.append(r)
            # else: redundant row, drop it
        self.tab = self.tab[keep]
        self.basis = self.basis[keep]

    def phase_two(self) -> str:
        cost = np.zeros(self.ncols)
        cost[: self.nstruct] = self.struct_cost
        allowed = np.ones(self.ncols, dtype=bool)
        allowed[self.art_start :] = False
        return _run_phase(self.tab, self.basis, cost, allowed)

    def extract(self) -> np.ndarray:
        y = np.zeros(self.ncols)
        y[self.basis] = self.tab[:, self.ncols]
        x = self.shift.copy()
        for col, (j, sign) in enumerate(self.col_map):
            x[j] += sign * y[col]
        return x


def _check_solution(lp: LinearProgram, x: np.ndarray) -> None:
    if lp.a.shape[0] == 0:
        return
    lhs = lp.a @ x
    for r, rel in enumerate(lp.relations):
        resid = lhs[r] - lp.b[r]
        ok = (
            resid <= FEAS_TOL
            if rel == LESS_EQUAL
            else resid >= -FEAS_TOL
            if rel == GREATER_EQUAL
            else abs(resid) <= FEAS_TOL
        )
        if not ok:
            raise NumericalBreakdown(
                f"solution violates constraint {r} ({rel}) by {resid}"
            )


def solve(lp: LinearProgram) -> LpSolution:
    """Solve the program; status is optimal, infeasible or unbounded.

    Reported optima are vertex solutions satisfying every constraint within
    1e-8 and the variable bounds exactly.  Degenerate problems return the
    first optimal vertex reached, so callers must not assume uniqueness.
    """
    std = _Standardized(lp)
    if not std.phase_one():
        return LpSolution(status=INFEASIBLE)
    status = std.phase_two()
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED)
    x = std.extract()
    x = np.clip(x, lp.lower, lp.upper)  # shave off sub-1e-9 pivot noise
    _check_solution(lp, x)
    return LpSolution(status=OPTIMAL, x=x, objective_value=float(lp.c @ x))


def check_feasible(lp: LinearProgram) -> bool:
    """Phase one only: is the feasible region nonempty?"""
    return _Standardized(lp).phase_one()

"""Dense two-phase simplex for the small allocation programs.

Maximize  c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= upper.

Pivoting follows Bland's rule (lowest-index improving column, ratio ties to
the lowest basic variable), so results are deterministic and the method
cannot cycle. Problems here have a few dozen variables at most.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .config import settings
from .errors import DimensionMismatchError, InfeasibleError, NumericalFailureError, UnboundedError

logger = logging.getLogger(__name__)


@dataclass
class LpProblem:
    objective: np.ndarray
    a_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    a_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    labels: Optional[List[str]] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.size
        self.a_ub, self.b_ub = _rows(self.a_ub, self.b_ub, n, "inequality")
        self.a_eq, self.b_eq = _rows(self.a_eq, self.b_eq, n, "equality")
        if self.upper is not None:
            self.upper = np.asarray(self.upper, dtype=float).reshape(-1)
            if self.upper.size != n:
                raise DimensionMismatchError(f"{self.upper.size} upper bounds for {n} variables")
        if self.labels is not None and len(self.labels) != n:
            raise DimensionMismatchError(f"{len(self.labels)} labels for {n} variables")

    @property
    def num_variables(self) -> int:
        return self.objective.size


def _rows(a, b, n: int, kind: str):
    if a is None:
        return np.zeros((0, n)), np.zeros(0)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape[1] != n or a.shape[0] != b.size:
        raise DimensionMismatchError(
            f"{kind.title()} block has shape {a.shape} with {b.size} right-hand sides for {n} variables"
        )
    return a, b


@dataclass
class LpSolution:
    x: np.ndarray
    value: float
    active: List[int]
    ub_duals: np.ndarray
    eq_duals: np.ndarray
    reduced_costs: np.ndarray
    pivots: int
    labels: Optional[List[str]] = field(default=None)

    def as_dict(self) -> Dict[str, float]:
        names = self.labels or [f"x{k}" for k in range(self.x.size)]
        return {name: float(value) for name, value in zip(names, self.x)}


class _Tableau:
    """Row-reduced constraint system with an explicit basis."""

    def __init__(self, matrix: np.ndarray, rhs: np.ndarray, basis: List[int], tol: float, max_pivots: int):
        self.table = np.hstack([matrix, rhs[:, None]])
        self.basis = list(basis)
        self.rows = list(range(matrix.shape[0]))
        self.tol = tol
        self.max_pivots = max_pivots
        self.pivots = 0

    def pivot(self, row: int, col: int):
        self.table[row] /= self.table[row, col]
        for other in range(self.table.shape[0]):
            if other != row and self.table[other, col] != 0.0:
                self.table[other] -= self.table[other, col] * self.table[row]
        self.basis[row] = col
        self.pivots += 1

    def drop_row(self, row: int):
        self.table = np.delete(self.table, row, axis=0)
        del self.basis[row]
        del self.rows[row]

    def optimize(self, cost: np.ndarray, allowed: np.ndarray):
        """Run primal simplex pivots until no allowed column improves ``cost``."""
        start = self.pivots
        while True:
            reduced = cost - cost[self.basis] @ self.table[:, :-1]
            candidates = np.flatnonzero(allowed & (reduced > self.tol))
            if candidates.size == 0:
                return
            col = int(candidates[0])

            column = self.table[:, col]
            eligible = np.flatnonzero(column > self.tol)
            if eligible.size == 0:
                raise UnboundedError(f"Objective is unbounded along variable {col}", variable=col)
            ratios = self.table[eligible, -1] / column[eligible]
            best = ratios.min()
            tied = eligible[ratios <= best + self.tol]
            row = int(min(tied, key=lambda r: self.basis[r]))

            self.pivot(row, col)
            if self.pivots - start > self.max_pivots:
                raise NumericalFailureError(f"Simplex exceeded {self.max_pivots} pivots", pivots=self.pivots)


def solve_lp(
    problem: LpProblem,
    tolerance: Optional[float] = None,
    max_pivots: Optional[int] = None,
) -> LpSolution:
    """Optimal basic solution of ``problem`` with dual certificate."""
    tol = settings.simplex_tolerance if tolerance is None else tolerance
    max_pivots = settings.simplex_max_pivots if max_pivots is None else max_pivots

    n = problem.num_variables
    a_ub, b_ub = problem.a_ub, problem.b_ub
    user_ub = a_ub.shape[0]
    if problem.upper is not None:
        finite = np.flatnonzero(np.isfinite(problem.upper))
        a_ub = np.vstack([a_ub, np.eye(n)[finite]])
        b_ub = np.concatenate([b_ub, problem.upper[finite]])

    m_ub, m_eq = a_ub.shape[0], problem.a_eq.shape[0]
    m = m_ub + m_eq
    num_std = n + m_ub

    # standard form: [A_ub I; A_eq 0] [x; s] = b with every right-hand side made non-negative
    standard = np.zeros((m, num_std))
    standard[:m_ub, :n] = a_ub
    standard[:m_ub, n:] = np.eye(m_ub)
    standard[m_ub:, :n] = problem.a_eq
    rhs = np.concatenate([b_ub, problem.b_eq])
    flipped = rhs < 0.0
    standard[flipped] *= -1.0
    rhs = np.abs(rhs)

    needs_artificial = [i for i in range(m) if i >= m_ub or flipped[i]]
    artificial = np.zeros((m, len(needs_artificial)))
    basis = [n + i for i in range(m)]
    for k, i in enumerate(needs_artificial):
        artificial[i, k] = 1.0
        basis[i] = num_std + k

    tableau = _Tableau(np.hstack([standard, artificial]), rhs, basis, tol, max_pivots)
    total = num_std + len(needs_artificial)
    is_artificial = np.arange(total) >= num_std

    if needs_artificial:
        phase_one = np.where(is_artificial, -1.0, 0.0)
        tableau.optimize(phase_one, np.ones(total, dtype=bool))
        infeasibility = -float(phase_one[tableau.basis] @ tableau.table[:, -1])
        if infeasibility > tol:
            raise InfeasibleError(
                f"Constraints are infeasible (phase one residual {infeasibility:.3e})",
                residual=infeasibility,
            )
        _drive_out_artificials(tableau, is_artificial, tol)

    cost = np.zeros(total)
    cost[:n] = problem.objective
    tableau.optimize(cost, ~is_artificial)

    solution = np.zeros(total)
    solution[tableau.basis] = tableau.table[:, -1]
    x = np.clip(solution[:n], 0.0, None)

    duals = np.zeros(m)
    if tableau.rows:
        basic = standard[tableau.rows][:, tableau.basis]
        try:
            kept = np.linalg.solve(basic.T, cost[tableau.basis])
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"Singular final basis: {str(e)}") from e
        duals[tableau.rows] = kept
    duals[flipped] *= -1.0

    full = np.zeros((m, n))
    full[:m_ub] = a_ub
    full[m_ub:] = problem.a_eq
    reduced = problem.objective - full.T @ duals
    active = [i for i in range(user_ub) if abs(float(a_ub[i] @ x) - b_ub[i]) <= max(tol, 1e-9)]

    value = float(problem.objective @ x)
    logger.debug(f"simplex: value {value:.12g} after {tableau.pivots} pivots")
    return LpSolution(
        x=x,
        value=value,
        active=active,
        ub_duals=duals[:user_ub],
        eq_duals=duals[m_ub:],
        reduced_costs=reduced,
        pivots=tableau.pivots,
        labels=problem.labels,
    )


def _drive_out_artificials(tableau: _Tableau, is_artificial: np.ndarray, tol: float):
    row = 0
    while row < len(tableau.basis):
        if not is_artificial[tableau.basis[row]]:
            row += 1
            continue
        candidates = np.flatnonzero(~is_artificial & (np.abs(tableau.table[row, :-1]) > tol))
        if candidates.size:
            tableau.pivot(row, int(candidates[0]))
            row += 1
        else:
            logger.debug(f"Dropping redundant constraint row {tableau.rows[row]}")
            tableau.drop_row(row)


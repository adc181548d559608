"""
Dense revised simplex for  min d.u  s.t.  M u >= q,  u >= 0

The solver works on the equality form [M, -I] (u, s) = q with surplus
variables s >= 0. Column j < cols is structural, column cols + i is the
surplus of row i. The basis inverse is kept explicitly, updated in product
form and refactorized every REFACTOR_EVERY pivots.
"""

import io
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, IterationLimitError, NumericalError
from .types import LpStatus

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9
DEGENERATE_SWITCH = 50
REFACTOR_EVERY = 100
MAX_REPAIRS = 3
DEFAULT_FRAC_TOL = 1e-3

_STEP_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class LpProblem:
    M: np.ndarray
    q: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float, ndmin=2)
        q = np.array(self.q, dtype=float).reshape(-1)
        d = np.array(self.d, dtype=float).reshape(-1)
        if M.shape != (q.size, d.size):
            raise DimensionError(f"M is {M.shape}, q has {q.size} rows, d has {d.size} columns")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(q)) and np.all(np.isfinite(d))):
            raise ValueError("LP data must be finite")
        for key, value in (("M", M), ("q", q), ("d", d)):
            value.setflags(write=False)
            object.__setattr__(self, key, value)

    @property
    def rows(self) -> int:
        return self.M.shape[0]

    @property
    def cols(self) -> int:
        return self.M.shape[1]

    def equality_matrix(self) -> np.ndarray:
        return np.hstack([self.M, -np.eye(self.rows)])

    def with_rows(self, extra_M: np.ndarray, extra_q: np.ndarray) -> "LpProblem":
        """Same LP with rows appended at the bottom"""
        return LpProblem(
            M=np.vstack([self.M, np.atleast_2d(extra_M)]),
            q=np.concatenate([self.q, np.atleast_1d(extra_q)]),
            d=self.d,
        )


@dataclass(frozen=True)
class Basis:
    """Ordered column indices into [M, -I]; position r owns row r of the inverse"""

    indices: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(j) for j in self.indices))
        if len(set(self.indices)) != len(self.indices):
            raise ValueError(f"Basis indices are not distinct: {self.indices}")

    def __len__(self):
        return len(self.indices)

    def extended(self, new_columns: Sequence[int]) -> "Basis":
        return Basis(self.indices + tuple(new_columns))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    objective: float
    primal: np.ndarray
    duals: np.ndarray
    basis: Optional[Basis] = None
    basis_inverse: Optional[np.ndarray] = None
    basic_values: Optional[np.ndarray] = None
    pivots: int = 0
    phase_one_pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


@dataclass(frozen=True)
class FractionalRow:
    row: int
    W_row: np.ndarray
    v: float


class RevisedSimplex:
    """Single-use solver; one instance per solve call"""

    def __init__(
        self,
        lp: LpProblem,
        max_iter: Optional[int] = None,
        feas_tol: float = FEAS_TOL,
        opt_tol: float = OPT_TOL,
        pivot_tol: float = PIVOT_TOL,
    ):
        self.lp = lp
        self.E = lp.equality_matrix()
        self.cost = np.concatenate([lp.d, np.zeros(lp.rows)])
        self.m = lp.rows
        self.max_iter = max_iter if max_iter is not None else 50 * (self.E.shape[1] + 10)
        self.feas_tol = feas_tol * (1.0 + float(np.max(np.abs(lp.q), initial=0.0)))
        self.opt_tol = opt_tol
        self.pivot_tol = pivot_tol
        self.pivots = 0
        self.basis = np.arange(lp.cols, lp.cols + lp.rows)
        self.Binv = -np.eye(self.m)
        self.xB = -lp.q.copy()
        self._active = self.E
        self._since_refactor = 0

    def solve(self, warm: Optional[Basis] = None) -> LpSolution:
        if warm is not None:
            self._check_warm(warm)
            self._install(np.array(warm.indices, dtype=int))
        else:
            self._install(np.arange(self.lp.cols, self.lp.cols + self.m))

        phase_one_pivots = 0
        if np.any(self.xB < -self.feas_tol):
            feasible = self._phase_one()
            phase_one_pivots = self.pivots
            if not feasible:
                logger.debug("LP infeasible after %d phase-one pivots", self.pivots)
                return self._result(LpStatus.INFEASIBLE, phase_one_pivots)

        outcome = self._primal_loop(self.cost, self.E)
        if outcome == "unbounded":
            return self._result(LpStatus.UNBOUNDED, phase_one_pivots)

        self._refactor()
        return self._result(LpStatus.OPTIMAL, phase_one_pivots)

    def dump_tableau(self) -> str:
        """Text dump of B^-1 [M, -I] | B^-1 q for test diagnosis"""
        out = io.StringIO()
        tableau = self.Binv @ self._active
        out.write(f"basis: {self.basis.tolist()}\n")
        with np.printoptions(precision=4, suppress=True, linewidth=200):
            for r in range(self.m):
                out.write(f"{self.basis[r]:>5} | {tableau[r]} | {self.xB[r]:.6g}\n")
        return out.getvalue()

    def _check_warm(self, warm: Basis) -> None:
        if len(warm) != self.m:
            raise DimensionError(f"Warm basis has {len(warm)} columns, LP has {self.m} rows")
        if any(j < 0 or j >= self.E.shape[1] for j in warm.indices):
            raise DimensionError(f"Warm basis index out of range: {warm.indices}")

    def _install(self, basis: np.ndarray) -> None:
        self.basis = basis.copy()
        self._refactor()

    def _refactor(self) -> None:
        for attempt in range(MAX_REPAIRS + 1):
            B = self._active[:, self.basis]
            try:
                Binv = np.linalg.inv(B)
                identity = np.eye(self.m)
                if np.max(np.abs(Binv @ B - identity), initial=0.0) > 1e-8:
                    Binv = Binv @ (2.0 * identity - B @ Binv)  # one refinement step
                if np.max(np.abs(Binv @ B - identity), initial=0.0) <= 1e-8:
                    self.Binv = Binv
                    self.xB = Binv @ self.lp.q
                    self._since_refactor = 0
                    return
            except np.linalg.LinAlgError:
                pass
            if attempt < MAX_REPAIRS:
                logger.warning("Singular basis, repairing (attempt %d)", attempt + 1)
                self.basis = self._repair(self.basis)
        raise NumericalError(f"Basis still singular after {MAX_REPAIRS} repairs")

    def _repair(self, basis: np.ndarray) -> np.ndarray:
        """Keep a maximal independent subset of basis columns, fill with surplus columns"""
        kept: List[int] = []
        surplus = [self.lp.cols + i for i in range(self.m)]
        for j in list(basis) + surplus:
            if len(kept) == self.m:
                break
            if j in kept:
                continue
            candidate = self._active[:, kept + [j]]
            if np.linalg.matrix_rank(candidate) == len(kept) + 1:
                kept.append(int(j))
        return np.array(kept, dtype=int)

    def _phase_one(self) -> bool:
        """
        Single-artificial phase one.

        With w marking the infeasible basic rows, the artificial column -B w
        moves every infeasible basic variable up at unit rate; pivoting it in
        on the most negative row makes the basis feasible in one step.
        """
        art = self.E.shape[1]
        w = (self.xB < -self.feas_tol).astype(float)
        column = -(self._active[:, self.basis] @ w)
        self._active = np.hstack([self.E, column[:, None]])
        cost = np.zeros(art + 1)
        cost[art] = 1.0

        r = int(np.argmin(self.xB))
        direction = self.Binv @ column
        self._pivot(r, art, direction, self.xB[r] / direction[r])

        if self._primal_loop(cost, self._active) == "unbounded":  # pragma: no cover
            raise NumericalError("Phase one reported unbounded")

        position = np.flatnonzero(self.basis == art)
        if position.size:
            r = int(position[0])
            if self.xB[r] > self.feas_tol:
                self._active = self.E
                return False
            self._drive_out(r)

        self._active = self.E
        self._refactor()
        return True

    def _drive_out(self, r: int) -> None:
        row = self.Binv[r] @ self.E
        row[self.basis[self.basis < self.E.shape[1]]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= self.pivot_tol:
            raise NumericalError("Cannot drive the artificial variable out of the basis")
        self._pivot(r, j, self.Binv @ self._active[:, j], 0.0)

    def _primal_loop(self, cost: np.ndarray, E: np.ndarray) -> str:
        degenerate = 0
        while True:
            if self.pivots >= self.max_iter:
                raise IterationLimitError(f"Iteration limit {self.max_iter} reached")

            y = cost[self.basis] @ self.Binv
            reduced = cost - y @ E
            reduced[self.basis] = 0.0
            candidates = np.flatnonzero(reduced < -self.opt_tol)
            if not candidates.size:
                return "optimal"

            if degenerate >= DEGENERATE_SWITCH:
                entering = int(candidates[0])  # Bland
            else:
                entering = int(candidates[np.argmin(reduced[candidates])])  # Dantzig

            direction = self.Binv @ E[:, entering]
            eligible = direction > self.pivot_tol
            if not np.any(eligible):
                return "unbounded"

            ratios = np.full(self.m, np.inf)
            ratios[eligible] = np.maximum(self.xB[eligible], 0.0) / direction[eligible]
            step = float(ratios.min())
            ties = np.flatnonzero(ratios <= step + _STEP_EPS)
            r = int(ties[np.argmin(self.basis[ties])])

            degenerate = degenerate + 1 if step <= _STEP_EPS else 0
            self._pivot(r, entering, direction, step)

    def _pivot(self, r: int, entering: int, direction: np.ndarray, step: float) -> None:
        self.xB = self.xB - step * direction
        self.xB[r] = step

        pivot_row = self.Binv[r] / direction[r]
        self.Binv = self.Binv - np.outer(direction, pivot_row)
        self.Binv[r] = pivot_row
        self.basis[r] = entering

        self.pivots += 1
        self._since_refactor += 1
        if self._since_refactor >= REFACTOR_EVERY:
            self._refactor()

    def _result(self, status: LpStatus, phase_one_pivots: int) -> LpSolution:
        cols = self.lp.cols
        if status != LpStatus.OPTIMAL:
            objective = np.inf if status == LpStatus.INFEASIBLE else -np.inf
            return LpSolution(
                status=status,
                objective=objective,
                primal=np.zeros(cols),
                duals=np.zeros(self.m),
                pivots=self.pivots,
                phase_one_pivots=phase_one_pivots,
            )

        full = np.zeros(self.E.shape[1])
        full[self.basis] = self.xB
        primal = full[:cols]
        duals = self.cost[self.basis] @ self.Binv
        return LpSolution(
            status=status,
            objective=float(self.lp.d @ primal),
            primal=primal,
            duals=duals,
            basis=Basis(tuple(self.basis)),
            basis_inverse=self.Binv.copy(),
            basic_values=self.xB.copy(),
            pivots=self.pivots,
            phase_one_pivots=phase_one_pivots,
        )


def solve(lp: LpProblem, warm: Optional[Basis] = None) -> LpSolution:
    """
    Solve lp, optionally warm-started from a previous basis.

    A stale or singular warm basis is repaired by swapping dependent columns for
    surplus columns; a primal-infeasible one goes through phase one.

    Raises:
        NumericalError: basis could not be refactorized
        IterationLimitError: pivot budget exhausted
    """
    solution = RevisedSimplex(lp).solve(warm)
    logger.debug(
        "LP %dx%d: %s obj=%.10g pivots=%d",
        lp.rows,
        lp.cols,
        solution.status.value,
        solution.objective,
        solution.pivots,
    )
    return solution


def extract_fractional_rows(
    sol: LpSolution, frac_tol: float = DEFAULT_FRAC_TOL, integer_count: Optional[int] = None
) -> List[FractionalRow]:
    """
    Tableau rows usable as classical GMI weights W = B^-1, v = B^-1 q.

    Only rows whose basic variable is one of the first integer_count structural
    columns (all structural columns when None) and whose basic value has a
    fractional part in [frac_tol, 1 - frac_tol] are returned.
    """
    if not sol.is_optimal:
        raise ValueError("extract_fractional_rows needs an optimal solution")
    limit = sol.primal.size if integer_count is None else integer_count

    rows = []
    for r, j in enumerate(sol.basis.indices):
        if j >= limit:
            continue
        v = float(sol.basic_values[r])
        frac = v - np.floor(v)
        if frac_tol <= frac <= 1.0 - frac_tol:
            rows.append(FractionalRow(row=r, W_row=sol.basis_inverse[r].copy(), v=v))
    return rows

"""
Best-bound branch and bound over the revised simplex, for exact MILP optima
"""

import heapq
import itertools
import logging
from dataclasses import dataclass
from typing import Optional, TextIO, Tuple

import numpy as np

from .errors import LpError
from .milp import MilpInstance
from .simplex import Basis, LpProblem, LpSolution, solve
from .types import BnbStatus, LpStatus

logger = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6
PRUNE_TOL = 1e-9
DEFAULT_NODE_LIMIT = 10000


@dataclass(frozen=True, eq=False)
class BnbResult:
    status: BnbStatus
    optimum: Optional[float]
    incumbent: Optional[Tuple[np.ndarray, np.ndarray]]
    nodes: int
    lower_bound: float

    @property
    def is_optimal(self) -> bool:
        return self.status == BnbStatus.OPTIMAL


@dataclass(frozen=True, eq=False)
class _Node:
    depth: int
    extra_M: np.ndarray
    extra_q: np.ndarray
    solution: LpSolution


def _branch_rows(n: int, j: int, value: float):
    """(row, rhs) for x_j >= ceil(value), then -x_j >= -floor(value)"""
    row = np.zeros(n)
    row[j] = 1.0
    return [(row, float(np.ceil(value))), (-row, -float(np.floor(value)))]


def branch_and_bound(
    instance: MilpInstance,
    node_limit: int = DEFAULT_NODE_LIMIT,
    node_log: Optional[TextIO] = None,
) -> BnbResult:
    """
    Solve the MILP exactly.

    Branches on the integer variable whose fractional part is closest to 1/2
    (lowest index on ties) and always expands the open node with the smallest
    LP bound. Children are warm-started from the parent basis.

    Args:
        instance: Problem to solve
        node_limit: Maximum number of nodes to expand
        node_log: Optional text stream receiving one line per expanded node

    Returns:
        BnbResult; at the node limit it carries the best incumbent found and
        the smallest bound among open nodes

    Raises:
        LpError: the root relaxation is unbounded
    """
    if node_limit < 1:
        raise ValueError("node_limit must be at least 1")
    base = instance.lp_relaxation()
    k, n = instance.k, instance.n

    root = solve(base)
    if root.status == LpStatus.UNBOUNDED:
        raise LpError("LP relaxation is unbounded")
    if root.status == LpStatus.INFEASIBLE:
        return BnbResult(BnbStatus.INFEASIBLE, None, None, nodes=1, lower_bound=np.inf)

    counter = itertools.count()
    heap = [(root.objective, next(counter), _Node(0, np.zeros((0, n)), np.zeros(0), root))]
    incumbent = None
    incumbent_value = np.inf
    nodes = 0

    while heap:
        bound, _, node = heap[0]
        if bound >= incumbent_value - PRUNE_TOL:
            heap.clear()
            break
        if nodes >= node_limit:
            break
        heapq.heappop(heap)
        nodes += 1

        x = node.solution.primal[:k]
        frac = x - np.floor(x)
        distance = np.abs(frac - 0.5)
        fractional = np.minimum(frac, 1.0 - frac) > INTEGRALITY_TOL
        if not np.any(fractional):
            x_round = np.round(x)
            z = node.solution.primal[k:]
            value = instance.objective(x_round, z)
            if value < incumbent_value:
                incumbent, incumbent_value = (x_round, z.copy()), value
            _log_node(node_log, nodes, bound, node.depth, f"integral {value:.10g}")
            continue

        j = int(np.argmin(np.where(fractional, distance, np.inf)))
        _log_node(node_log, nodes, bound, node.depth, f"branch x{j}={x[j]:.6g}")
        for row, rhs in _branch_rows(n, j, x[j]):
            extra_M = np.vstack([node.extra_M, row])
            extra_q = np.append(node.extra_q, rhs)
            lp = base.with_rows(extra_M, extra_q)
            warm = node.solution.basis.extended([lp.cols + lp.rows - 1])
            child = _solve_child(lp, warm)
            if child.status != LpStatus.OPTIMAL:
                continue
            if child.objective >= incumbent_value - PRUNE_TOL:
                continue
            heapq.heappush(
                heap,
                (child.objective, next(counter), _Node(node.depth + 1, extra_M, extra_q, child)),
            )

    if heap:
        open_bound = heap[0][0]
        logger.info("Node limit %d reached; bound %.10g", node_limit, open_bound)
        return BnbResult(
            BnbStatus.NODE_LIMIT,
            None if incumbent is None else incumbent_value,
            incumbent,
            nodes=nodes,
            lower_bound=min(open_bound, incumbent_value),
        )
    if incumbent is None:
        return BnbResult(BnbStatus.INFEASIBLE, None, None, nodes=nodes, lower_bound=np.inf)

    logger.debug("B&B optimum %.10g after %d nodes", incumbent_value, nodes)
    return BnbResult(
        BnbStatus.OPTIMAL, incumbent_value, incumbent, nodes=nodes, lower_bound=incumbent_value
    )


def _solve_child(lp: LpProblem, warm: Basis) -> LpSolution:
    sol = solve(lp, warm)
    if sol.status == LpStatus.UNBOUNDED:
        raise LpError("Child LP unbounded under a bounded root")
    return sol


def _log_node(stream: Optional[TextIO], index: int, bound: float, depth: int, event: str) -> None:
    logger.debug("node %d depth %d bound %.10g: %s", index, depth, bound, event)
    if stream is not None:
        stream.write(f"node {index} depth {depth} bound {bound:.10g} {event}\n")

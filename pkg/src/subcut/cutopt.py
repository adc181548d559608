"""
Two-step optimization of cut weights: solve LP(f_theta), then push f_theta to cut its optimum
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import LogDomainError, LpError
from .milp import MilpInstance, optimality_gap_report
from .net import SubadditiveNet, cutoff_loss, enlarged_lp, loss_gradients
from .simplex import Basis, LpProblem, solve
from .types import RunStatus

logger = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6
TRACE_COLUMNS = [
    "step",
    "outer_iter",
    "dual_bound",
    "best_bound",
    "gap",
    "inner_steps",
    "pivots",
    "seconds",
]


@dataclass(frozen=True)
class OptimizerConfig:
    alpha: float = 1e-3
    beta: float = 1e-4
    max_outer: int = 100000
    max_inner: int = 1000
    max_total_steps: int = 2000
    conv_tol: float = 1e-6
    conv_window: int = 50
    seed: int = 0
    cut_tol: float = 1e-6
    timing: bool = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        for key in ("max_outer", "max_inner", "max_total_steps", "conv_window"):
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be at least 1, got {getattr(self, key)}")
        if not self.conv_tol > 0:
            raise ValueError(f"conv_tol must be positive, got {self.conv_tol}")
        if self.cut_tol < 0:
            raise ValueError(f"cut_tol must be nonnegative, got {self.cut_tol}")


@dataclass
class TraceRecord:
    """
    One outer iteration. total_grad_steps counts the steps taken before this
    LP was solved, inner_steps the ones taken right after it.
    """

    outer_iter: int
    total_grad_steps: int
    dual_bound: float
    best_bound: float
    gap: Optional[float]
    inner_steps: int
    pivots: int
    seconds: float = 0.0
    cut_found: bool = False

    def to_row(self) -> List[str]:
        return [
            str(self.total_grad_steps),
            str(self.outer_iter),
            repr(float(self.dual_bound)),
            repr(float(self.best_bound)),
            "" if self.gap is None else repr(float(self.gap)),
            str(self.inner_steps),
            str(self.pivots),
            repr(float(self.seconds)),
        ]

    @classmethod
    def from_row(cls, row: dict) -> "TraceRecord":
        return cls(
            outer_iter=int(row["outer_iter"]),
            total_grad_steps=int(row["step"]),
            dual_bound=float(row["dual_bound"]),
            best_bound=float(row["best_bound"]),
            gap=None if row["gap"] == "" else float(row["gap"]),
            inner_steps=int(row["inner_steps"]),
            pivots=int(row["pivots"]),
            seconds=float(row["seconds"]),
        )


@dataclass
class RunTrace:
    records: List[TraceRecord] = field(default_factory=list)
    known_optimum: Optional[float] = None
    status: Optional[RunStatus] = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    @property
    def initial_bound(self) -> float:
        return self.records[0].dual_bound

    @property
    def best_bound(self) -> float:
        return self.records[-1].best_bound

    @property
    def total_grad_steps(self) -> int:
        last = self.records[-1]
        return last.total_grad_steps + last.inner_steps

    def best_bounds(self) -> np.ndarray:
        return np.array([r.best_bound for r in self.records])

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for record in self.records:
                writer.writerow(record.to_row())

    @classmethod
    def read_csv(cls, path: Path) -> "RunTrace":
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != TRACE_COLUMNS:
                raise ValueError(f"{path} is not a trace file (columns {reader.fieldnames})")
            return cls(records=[TraceRecord.from_row(row) for row in reader])


def build_enlarged_lp(net: SubadditiveNet, instance: MilpInstance) -> LpProblem:
    """LP(f_theta): the original rows followed by every layer's cuts"""
    return enlarged_lp(net, instance)


def budget_exhausted(trace: RunTrace, config: OptimizerConfig) -> bool:
    last = trace.records[-1]
    return last.outer_iter >= config.max_outer or last.total_grad_steps >= config.max_total_steps


def converged(trace: RunTrace, config: OptimizerConfig) -> bool:
    """
    True once a budget is spent, or best_bound moved less than
    conv_tol * (1 + |best_bound|) over the last conv_window outer iterations.
    """
    if not trace.records:
        raise ValueError("converged needs a nonempty trace")
    if budget_exhausted(trace, config):
        return True
    window = config.conv_window
    if len(trace) <= window:
        return False
    best = trace.records[-1].best_bound
    earlier = trace.records[-1 - window].best_bound
    return best - earlier < config.conv_tol * (1.0 + abs(best))


def _is_integral(x: np.ndarray) -> bool:
    return bool(np.all(np.abs(x - np.round(x)) <= INTEGRALITY_TOL))


def _inner_loop(
    net: SubadditiveNet,
    instance: MilpInstance,
    x_star: np.ndarray,
    z_star: np.ndarray,
    config: OptimizerConfig,
    rng: np.random.Generator,
    steps_left: int,
) -> Tuple[SubadditiveNet, int, bool]:
    """
    Gradient steps on the noisy target until some cut row separates (x*, z*).

    Returns:
        (net, steps taken, whether a cut was found)
    """
    m, k = instance.m, instance.k
    _, violation, cache = cutoff_loss(net, instance, x_star, z_star)
    steps = 0
    limit = min(config.max_inner, steps_left)
    while True:
        if np.any(violation[m:] < -config.cut_tol):
            return net, steps, True
        if steps >= limit:
            if steps >= config.max_inner:
                logger.warning("Inner loop stalled after %d steps without a cut", steps)
            return net, steps, False

        noise = rng.standard_normal(instance.n)
        x_bar = x_star + config.beta * noise[:k]
        z_bar = z_star + config.beta * noise[k:]
        grads = loss_gradients(net, instance, x_bar, z_bar, cache)
        candidate = net.step(grads, config.alpha)
        try:
            _, violation, cache = cutoff_loss(candidate, instance, x_star, z_star)
        except LogDomainError as e:
            logger.warning("Rejected gradient step: %s", e)
            return net, steps, False
        net = candidate
        steps += 1


def two_step_optimize(
    instance: MilpInstance, net0: SubadditiveNet, config: OptimizerConfig
) -> Tuple[SubadditiveNet, RunTrace]:
    """
    Alternate between solving LP(f_theta) and stepping theta until its optimum is cut.

    Stops when the LP optimum is integral, when the best bound stops improving,
    or when a budget runs out.

    Returns:
        (net achieving the best bound, trace of every outer iteration)

    Raises:
        LpError: an enlarged LP was not solved to optimality
    """
    rng = np.random.default_rng(config.seed)
    trace = RunTrace(known_optimum=instance.known_optimum)
    net = net0
    best_net = net0
    best_bound = -np.inf
    warm: Optional[Basis] = None
    total_steps = 0
    started = time.perf_counter()

    for outer in range(1, config.max_outer + 1):
        lp = build_enlarged_lp(net, instance)
        if warm is not None and len(warm) != lp.rows:
            warm = None
        sol = solve(lp, warm)
        if not sol.is_optimal:
            raise LpError(f"Enlarged LP at outer iteration {outer} is {sol.status.value}")
        warm = sol.basis

        if sol.objective > best_bound:
            best_bound = sol.objective
            best_net = net

        x_star, z_star = sol.primal[: instance.k], sol.primal[instance.k :]
        integral = _is_integral(x_star)
        steps, cut_found = 0, False
        if not integral:
            net, steps, cut_found = _inner_loop(
                net, instance, x_star, z_star, config, rng, config.max_total_steps - total_steps
            )

        gap = None
        if instance.known_optimum is not None:
            gap, _ = optimality_gap_report(best_bound, instance.known_optimum)
        record = TraceRecord(
            outer_iter=outer,
            total_grad_steps=total_steps,
            dual_bound=sol.objective,
            best_bound=best_bound,
            gap=gap,
            inner_steps=steps,
            pivots=sol.pivots,
            seconds=time.perf_counter() - started if config.timing else 0.0,
            cut_found=cut_found,
        )
        trace.append(record)
        total_steps += steps
        logger.info(
            "outer %d: bound %.10g best %.10g steps %d (+%d)",
            outer,
            sol.objective,
            best_bound,
            record.total_grad_steps,
            steps,
        )

        if integral:
            trace.status = RunStatus.INTEGRAL
            break
        if converged(trace, config):
            exhausted = budget_exhausted(trace, config)
            trace.status = RunStatus.BUDGET if exhausted else RunStatus.CONVERGED
            break
    else:
        trace.status = RunStatus.BUDGET

    return best_net, trace

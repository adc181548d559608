"""
Core orchestration for subcut: instance generation, baselines, optimization runs and reports
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from .config import RunSpec, merge_config
from .cutopt import RunTrace, two_step_optimize
from .errors import GeneratorError
from .exact import BnbResult, branch_and_bound
from .generators.base import InstanceGenerator
from .generators.indepset import IndependentSetGenerator
from .generators.mixed import RandomMixedGenerator
from .generators.setcover import SetCoverGenerator
from .milp import MilpInstance, load_instance, optimality_gap_report
from .net import (
    SubadditiveNet,
    classical_gmi_rounds,
    gmi_warm_start,
    random_orthogonal_init,
    save_checkpoint,
)
from .types import BnbStatus, InitMethod, RunStatus, Variant

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineResult:
    net: SubadditiveNet
    bounds: List[float]
    optimum: Optional[float]

    def gap(self, bound: float) -> Optional[float]:
        if self.optimum is None:
            return None
        return optimality_gap_report(bound, self.optimum)[0]


@dataclass(frozen=True)
class RunSummary:
    """Picklable outcome of one optimize run"""

    name: str
    initial_bound: float
    best_bound: float
    steps: int
    outer_iterations: int
    status: Optional[RunStatus]
    gap: Optional[float] = None
    gap_is_absolute: bool = False

    @classmethod
    def from_trace(cls, name: str, trace: RunTrace) -> "RunSummary":
        gap, absolute = None, False
        if trace.known_optimum is not None:
            gap, absolute = optimality_gap_report(trace.best_bound, trace.known_optimum)
        elif trace.records[-1].gap is not None:
            gap = trace.records[-1].gap
        return cls(
            name=name,
            initial_bound=trace.initial_bound,
            best_bound=trace.best_bound,
            steps=trace.total_grad_steps,
            outer_iterations=len(trace),
            status=trace.status,
            gap=gap,
            gap_is_absolute=absolute,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": None if self.status is None else self.status.value,
            "initial_bound": self.initial_bound,
            "best_bound": self.best_bound,
            "improvement": self.best_bound - self.initial_bound,
            "steps": self.steps,
            "outer_iterations": self.outer_iterations,
            "gap": self.gap,
            "gap_is_absolute": self.gap_is_absolute,
        }


class CutExperiment:
    """Main experiment class that orchestrates instances, nets and solvers"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = merge_config(overrides=config)
        self.generators: Dict[str, InstanceGenerator] = {}
        self._register_default_generators()

    def _register_default_generators(self):
        """Register built-in instance families"""
        self.register_generator(SetCoverGenerator())
        self.register_generator(IndependentSetGenerator())
        self.register_generator(RandomMixedGenerator())

    def register_generator(self, generator: InstanceGenerator):
        """Register a new instance family"""
        self.generators[generator.name] = generator

    def generate(
        self, family: str, seed: int, params: Optional[Dict[str, Any]] = None
    ) -> MilpInstance:
        generator = self.generators.get(family)
        if generator is None:
            raise GeneratorError(
                f"Unknown family {family!r} (known: {', '.join(sorted(self.generators))})"
            )
        return generator.generate(seed, **(params or {}))

    def initial_net(
        self,
        instance: MilpInstance,
        widths: Optional[List[Optional[int]]] = None,
        init: Optional[InitMethod] = None,
        variant: Optional[Variant] = None,
    ) -> SubadditiveNet:
        widths = list(widths if widths is not None else self.config["widths"])
        init = InitMethod(init or self.config["init"])
        variant = Variant(variant or self.config["variant"])
        if init == InitMethod.GMI:
            return gmi_warm_start(instance, widths, self.config["frac_tol"], variant=variant)
        return random_orthogonal_init(instance.m, widths, self.config["seed"], variant=variant)

    def reference_optimum(self, instance: MilpInstance) -> Optional[float]:
        """known_optimum when present, else the exact optimum if B&B finishes in budget"""
        if instance.known_optimum is not None:
            return instance.known_optimum
        result = branch_and_bound(instance, self.config["node_limit"])
        return result.optimum if result.status == BnbStatus.OPTIMAL else None

    def baseline(
        self, instance: MilpInstance, widths: Optional[List[Optional[int]]] = None
    ) -> BaselineResult:
        """Classical GMI rounds with their per-round LP bounds"""
        widths = list(widths if widths is not None else self.config["widths"])
        net, bounds = classical_gmi_rounds(instance, widths, self.config["frac_tol"])
        return BaselineResult(net=net, bounds=bounds, optimum=self.reference_optimum(instance))

    def solve_exact(self, instance: MilpInstance, node_log=None) -> BnbResult:
        return branch_and_bound(instance, self.config["node_limit"], node_log=node_log)

    def optimize(self, spec: RunSpec) -> RunSummary:
        """Run two_step_optimize for one instance and write the requested outputs"""
        instance = load_instance(spec.instance)
        if spec.init == InitMethod.GMI:
            net0 = gmi_warm_start(instance, spec.widths, spec.frac_tol, variant=spec.variant)
        else:
            net0 = random_orthogonal_init(
                instance.m, spec.widths, spec.optimizer.seed, variant=spec.variant
            )
        logger.info(
            "Optimizing %s: widths %s, %d parameters",
            instance.name,
            net0.widths,
            net0.num_parameters,
        )

        best_net, trace = two_step_optimize(instance, net0, spec.optimizer)
        if spec.trace is not None:
            trace.write_csv(spec.trace)
        if spec.out is not None:
            save_checkpoint(best_net, spec.out)
        return RunSummary.from_trace(instance.name, trace)

    def report_trace(self, trace: RunTrace, name: str, format: str = "text") -> str:
        """Summarize a trace as text or JSON"""
        summary = RunSummary.from_trace(name, trace)
        if format == "json":
            return json.dumps(summary.to_dict(), indent=2)
        return format_summary(summary)


def format_summary(summary: RunSummary) -> str:
    emoji = summary.status.to_emoji() if summary.status else "📈"
    status = summary.status.value.upper() if summary.status else "TRACE"
    report = [
        f"{emoji} {status}: {summary.name}",
        f"   Initial bound: {summary.initial_bound:.10g}",
        f"   Best bound: {summary.best_bound:.10g}",
        f"   Gradient steps: {summary.steps} over {summary.outer_iterations} LP solves",
    ]
    if summary.gap is not None:
        kind = "absolute" if summary.gap_is_absolute else "relative"
        report.append(f"   Gap ({kind}): {summary.gap:.6g}")
    return "\n".join(report)


def run_spec(spec: RunSpec, config: Optional[Dict[str, Any]] = None) -> RunSummary:
    """Worker entry point for parallel optimize runs"""
    return CutExperiment(config).optimize(spec)

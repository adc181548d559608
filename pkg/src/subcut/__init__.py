"""
Subadditive Cut Optimizer (subcut)
Continuous optimization of generalized GMI cut weights for MILP dual bounds
"""

from .core import CutExperiment, RunSummary
from .cutopt import (
    OptimizerConfig,
    RunTrace,
    TraceRecord,
    build_enlarged_lp,
    converged,
    two_step_optimize,
)
from .errors import SubcutError
from .exact import BnbResult, branch_and_bound
from .generators import generate_max_indep_set, generate_random_mixed, generate_set_cover
from .milp import (
    FeasiblePointSet,
    MilpInstance,
    enumerate_feasible,
    load_instance,
    optimality_gap,
    save_instance,
)
from .net import (
    GmiLayer,
    GradientSet,
    SubadditiveNet,
    cutoff_loss,
    gmi_warm_start,
    layer_phi,
    layer_phi_bar,
    loss_gradients,
    net_forward,
    random_orthogonal_init,
)
from .simplex import Basis, LpProblem, LpSolution, extract_fractional_rows, solve
from .types import BnbStatus, InitMethod, LpStatus, RunStatus, Variant

__version__ = "0.1.0"
__all__ = [
    "Basis",
    "BnbResult",
    "BnbStatus",
    "CutExperiment",
    "FeasiblePointSet",
    "GmiLayer",
    "GradientSet",
    "InitMethod",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MilpInstance",
    "OptimizerConfig",
    "RunStatus",
    "RunSummary",
    "RunTrace",
    "SubadditiveNet",
    "SubcutError",
    "TraceRecord",
    "Variant",
    "branch_and_bound",
    "build_enlarged_lp",
    "converged",
    "cutoff_loss",
    "enumerate_feasible",
    "extract_fractional_rows",
    "generate_max_indep_set",
    "generate_random_mixed",
    "generate_set_cover",
    "gmi_warm_start",
    "layer_phi",
    "layer_phi_bar",
    "load_instance",
    "loss_gradients",
    "net_forward",
    "optimality_gap",
    "random_orthogonal_init",
    "save_instance",
    "solve",
]

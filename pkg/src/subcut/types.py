"""
Enums and small shared types for subcut
"""

from enum import Enum, IntEnum


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class BnbStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NODE_LIMIT = "node_limit"


class Variant(Enum):
    """Cut family used by every layer of a subadditive net"""

    GMI = "gmi"
    LOG = "log"


class InitMethod(Enum):
    GMI = "gmi"
    RANDOM = "random"


class RunStatus(Enum):
    CONVERGED = "converged"
    BUDGET = "budget"
    INTEGRAL = "integral"

    def to_emoji(self) -> str:
        return {
            RunStatus.CONVERGED: "📉",
            RunStatus.BUDGET: "⏱️",
            RunStatus.INTEGRAL: "✅",
        }[self]


class ExitCode(IntEnum):
    OK = 0
    NUMERICAL_FAILURE = 1
    USAGE = 2
    NODE_LIMIT = 3
    INFEASIBLE = 4

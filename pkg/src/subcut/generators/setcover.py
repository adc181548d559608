"""
Random minimum set covering instances
"""

import logging
from typing import Any, Dict

import numpy as np

from ..errors import GeneratorError
from ..milp import MilpInstance
from .base import InstanceGenerator

logger = logging.getLogger(__name__)

MAX_COST = 100
MAX_RESAMPLES = 100


def generate_set_cover(rows: int, cols: int, density: float, seed: int) -> MilpInstance:
    """
    min sum c_j x_j  s.t.  sum_{j in S_i} x_j >= 1 for every row i, x binary-valued.

    Costs are uniform on {1, ..., 100}; each (row, column) membership is kept
    with probability density, resampling until every row and every column is used.

    Raises:
        GeneratorError: Invalid parameters, or coverage not reached after
            MAX_RESAMPLES draws
    """
    if rows < 1:
        raise GeneratorError(f"rows must be at least 1, got {rows}")
    if cols < 2:
        raise GeneratorError(f"cols must be at least 2, got {cols}")
    if not 0.0 < density < 1.0:
        raise GeneratorError(f"density must lie in (0, 1), got {density}")
    if density * cols < 1.0:
        raise GeneratorError(f"density * cols = {density * cols:.3g} < 1; rows would be empty")

    rng = np.random.default_rng(seed)
    costs = rng.integers(1, MAX_COST + 1, size=cols)
    for attempt in range(1, MAX_RESAMPLES + 1):
        A = (rng.random((rows, cols)) < density).astype(float)
        if np.all(A.any(axis=1)) and np.all(A.any(axis=0)):
            logger.debug("set cover sampled after %d attempt(s)", attempt)
            return MilpInstance(
                name=f"setcover-{rows}x{cols}-d{density:g}-s{seed}",
                A=A,
                G=np.zeros((rows, 0)),
                b=np.ones(rows),
                c=costs.astype(float),
                h=np.zeros(0),
            )

    raise GeneratorError(
        f"No covering {rows}x{cols} matrix at density {density} after {MAX_RESAMPLES} draws"
    )


class SetCoverGenerator(InstanceGenerator):
    @property
    def name(self) -> str:
        return "setcover"

    @property
    def parameters(self) -> Dict[str, Any]:
        return {"rows": 20, "cols": 40, "density": 0.2}

    def build(self, seed: int, **params) -> MilpInstance:
        return generate_set_cover(
            int(params["rows"]), int(params["cols"]), float(params["density"]), seed
        )

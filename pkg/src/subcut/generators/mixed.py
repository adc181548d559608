"""
Small random mixed-integer instances with continuous columns
"""

from typing import Any, Dict, Optional

import numpy as np

from ..errors import GeneratorError
from ..milp import MilpInstance
from .base import InstanceGenerator

COEF_RANGE = 5
MAX_RESAMPLES = 100


def generate_random_mixed(
    m: int, k: int, ncont: int, seed: int, box: Optional[int] = None
) -> MilpInstance:
    """
    Feasible, bounded instance with integer A, G in [-5, 5] and costs in [1, 10].

    b = A x0 + G z0 - s for a hidden point x0 in {0, 1, 2}^k, z0 in {0, 0.5, ..., 2}
    and integer slack s in {0, 1, 2}, so (x0, z0) is always feasible. Positive
    costs keep the LP bounded. With box set, rows -x_j >= -box are appended.
    """
    if m < 1 or k < 1 or ncont < 1:
        raise GeneratorError(f"need m, k, ncont >= 1, got m={m}, k={k}, ncont={ncont}")
    if box is not None and box < 2:
        raise GeneratorError(f"box must be at least 2 to contain the hidden point, got {box}")

    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLES):
        A = rng.integers(-COEF_RANGE, COEF_RANGE + 1, size=(m, k)).astype(float)
        G = rng.integers(-COEF_RANGE, COEF_RANGE + 1, size=(m, ncont)).astype(float)
        if not np.any(G):
            continue
        x0 = rng.integers(0, 3, size=k).astype(float)
        z0 = rng.integers(0, 5, size=ncont) / 2.0
        slack = rng.integers(0, 3, size=m).astype(float)
        b = A @ x0 + G @ z0 - slack
        c = rng.integers(1, 11, size=k).astype(float)
        h = rng.integers(1, 11, size=ncont).astype(float)
        break
    else:
        raise GeneratorError(f"All-zero G in {MAX_RESAMPLES} draws")

    if box is not None:
        A = np.vstack([A, -np.eye(k)])
        G = np.vstack([G, np.zeros((k, ncont))])
        b = np.concatenate([b, np.full(k, -float(box))])

    return MilpInstance(name=f"mixed-{m}x{k}+{ncont}-s{seed}", A=A, G=G, b=b, c=c, h=h)


class RandomMixedGenerator(InstanceGenerator):
    @property
    def name(self) -> str:
        return "mixed"

    @property
    def parameters(self) -> Dict[str, Any]:
        return {"m": 3, "k": 3, "ncont": 2, "box": None}

    def build(self, seed: int, **params) -> MilpInstance:
        box = params["box"]
        return generate_random_mixed(
            int(params["m"]),
            int(params["k"]),
            int(params["ncont"]),
            seed,
            box=None if box is None else int(box),
        )

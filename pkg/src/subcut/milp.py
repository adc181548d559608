"""
MILP data model, instance files, the enumeration oracle and the gap metric
"""

import csv
import itertools
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import EnumerationLimitError, GapUndefinedError, InstanceValidationError
from .formats import (
    FORMAT_VERSION,
    all_finite,
    check_format_version,
    decode_triplets,
    decode_vector,
    encode_triplets,
    read_json,
    require_keys,
    write_json,
)
from .simplex import LpProblem, solve
from .types import LpStatus

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10**7
FEASIBILITY_TOL = 1e-9
GAP_ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """
    min c.x + h.z  s.t.  A x + G z >= b,  x, z >= 0,  x integer

    A holds the k integer-variable columns, G the n - k continuous ones.
    """

    name: str
    A: np.ndarray
    G: np.ndarray
    b: np.ndarray
    c: np.ndarray
    h: np.ndarray
    known_optimum: Optional[float] = None

    def __post_init__(self):
        for key in ("A", "G", "b", "c", "h"):
            object.__setattr__(self, key, np.array(getattr(self, key), dtype=float))
            getattr(self, key).setflags(write=False)
        self.validate()

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.k + self.G.shape[1]

    @property
    def is_pure_integer(self) -> bool:
        return self.G.shape[1] == 0

    def validate(self) -> None:
        """Raise InstanceValidationError naming the first offending field"""
        if self.A.ndim != 2:
            raise InstanceValidationError("A must be a matrix", "A")
        if self.G.ndim != 2:
            raise InstanceValidationError("G must be a matrix", "G")
        m = self.A.shape[0]
        if m < 1:
            raise InstanceValidationError("instance needs at least one row", "m")
        if self.G.shape[0] != m:
            raise InstanceValidationError(f"G has {self.G.shape[0]} rows, expected {m}", "G")
        if self.b.shape != (m,):
            raise InstanceValidationError(f"b has shape {self.b.shape}, expected ({m},)", "b")
        if self.c.shape != (self.A.shape[1],):
            raise InstanceValidationError(
                f"c has shape {self.c.shape}, expected ({self.A.shape[1]},)", "c"
            )
        if self.h.shape != (self.G.shape[1],):
            raise InstanceValidationError(
                f"h has shape {self.h.shape}, expected ({self.G.shape[1]},)", "h"
            )
        for key in ("A", "G", "b", "c", "h"):
            if not all_finite(getattr(self, key)):
                raise InstanceValidationError(f"{key} has a non-finite entry", key)
        if self.known_optimum is not None and not np.isfinite(self.known_optimum):
            raise InstanceValidationError("known_optimum is not finite", "known_optimum")

    def objective(self, x: np.ndarray, z: Optional[np.ndarray] = None) -> float:
        value = float(self.c @ np.asarray(x, dtype=float))
        if self.G.shape[1]:
            value += float(self.h @ np.asarray(z, dtype=float))
        return value

    def is_feasible(self, x: np.ndarray, z: Optional[np.ndarray] = None, tol: float = 1e-7) -> bool:
        """Linear feasibility of (x, z); integrality is not checked"""
        x = np.asarray(x, dtype=float)
        z = np.zeros(0) if z is None else np.asarray(z, dtype=float)
        if np.any(x < -tol) or np.any(z < -tol):
            return False
        return bool(np.all(self.A @ x + self.G @ z >= self.b - tol))

    def with_known_optimum(self, value: Optional[float]) -> "MilpInstance":
        return replace(self, known_optimum=value)

    def lp_relaxation(self) -> LpProblem:
        """The plain LP relaxation as an LpProblem over u = (x, z)"""
        return LpProblem(
            M=np.hstack([self.A, self.G]), q=self.b, d=np.concatenate([self.c, self.h])
        )

    def __eq__(self, other):
        if not isinstance(other, MilpInstance):
            return NotImplemented
        return (
            self.name == other.name
            and self.known_optimum == other.known_optimum
            and all(
                np.array_equal(getattr(self, key), getattr(other, key))
                for key in ("A", "G", "b", "c", "h")
            )
        )

    def __repr__(self):
        return f"MilpInstance(name={self.name!r}, m={self.m}, n={self.n}, k={self.k})"


@dataclass(frozen=True)
class FeasiblePointSet:
    points: List[Tuple[Tuple[int, ...], np.ndarray]] = field(default_factory=list)
    exhaustive_bound: int = 0

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def best_objective(self, instance: MilpInstance) -> Optional[float]:
        """Minimum objective over the listed points, None when empty"""
        if not self.points:
            return None
        return min(instance.objective(np.array(x), z) for x, z in self.points)


def load_instance(path: Path) -> MilpInstance:
    """
    Read an instance file.

    Raises:
        InstanceFormatError: Malformed syntax or a missing/mistyped key
        InstanceValidationError: Dimension mismatch or non-finite entry
        FormatVersionError: Incompatible format_version
    """
    data = read_json(Path(path))
    require_keys(data, ["name", "k", "n", "m", "A", "b", "c"])
    check_format_version(data.get("format_version"))

    for key in ("k", "n", "m"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise InstanceValidationError(f"'{key}' must be an integer", key)
    k, n, m = data["k"], data["n"], data["m"]
    if m < 1:
        raise InstanceValidationError("'m' must be at least 1", "m")
    if not 0 <= k <= n:
        raise InstanceValidationError(f"need 0 <= k <= n, got k={k}, n={n}", "k")
    if not isinstance(data["name"], str):
        raise InstanceValidationError("'name' must be a string", "name")

    known = data.get("known_optimum")
    if known is not None and (not isinstance(known, (int, float)) or isinstance(known, bool)):
        raise InstanceValidationError("'known_optimum' must be a number", "known_optimum")

    return MilpInstance(
        name=data["name"],
        A=decode_triplets(data["A"], (m, k), "A"),
        G=decode_triplets(data.get("G", []), (m, n - k), "G"),
        b=decode_vector(data["b"], m, "b"),
        c=decode_vector(data["c"], k, "c"),
        h=decode_vector(data.get("h", []), n - k, "h"),
        known_optimum=None if known is None else float(known),
    )


def save_instance(instance: MilpInstance, path: Path) -> None:
    """Write an instance in the canonical schema; OSError on I/O failure"""
    data = {
        "format_version": FORMAT_VERSION,
        "name": instance.name,
        "k": instance.k,
        "n": instance.n,
        "m": instance.m,
        "A": encode_triplets(instance.A),
        "G": encode_triplets(instance.G),
        "b": [float(v) for v in instance.b],
        "c": [float(v) for v in instance.c],
        "h": [float(v) for v in instance.h],
    }
    if instance.known_optimum is not None:
        data["known_optimum"] = float(instance.known_optimum)
    write_json(data, Path(path))


def enumerate_feasible(instance: MilpInstance, bound: int) -> FeasiblePointSet:
    """
    Every integer x in [0, bound]^k that admits a feasible z.

    For mixed instances z is the cheapest completion, found with an LP over the
    continuous columns. An empty set is a valid answer.

    Raises:
        EnumerationLimitError: (bound + 1)^k exceeds the enumeration budget
    """
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if (bound + 1) ** instance.k > ENUMERATION_BUDGET:
        raise EnumerationLimitError(
            f"(bound+1)^k = {bound + 1}^{instance.k} exceeds budget {ENUMERATION_BUDGET}"
        )

    points = []
    ncont = instance.G.shape[1]
    for combo in itertools.product(range(bound + 1), repeat=instance.k):
        x = np.array(combo, dtype=float)
        residual = instance.b - instance.A @ x
        if ncont == 0:
            if np.all(residual <= FEASIBILITY_TOL):
                points.append((combo, np.zeros(0)))
            continue

        z = _cheapest_completion(instance, residual)
        if z is not None:
            points.append((combo, z))

    logger.debug("Enumerated %d feasible points of %s", len(points), instance.name)
    return FeasiblePointSet(points=points, exhaustive_bound=bound)


def _cheapest_completion(instance: MilpInstance, residual: np.ndarray) -> Optional[np.ndarray]:
    # rows with no continuous support must already hold
    empty = ~np.any(instance.G != 0, axis=1)
    if np.any(residual[empty] > FEASIBILITY_TOL):
        return None

    sol = solve(LpProblem(M=instance.G, q=residual, d=instance.h))
    if sol.status == LpStatus.UNBOUNDED:
        sol = solve(LpProblem(M=instance.G, q=residual, d=np.zeros_like(instance.h)))
    if sol.status != LpStatus.OPTIMAL:
        return None
    return np.maximum(sol.primal, 0.0)


def write_points_csv(points: FeasiblePointSet, path: Path) -> None:
    """One point per line, x then z, comma-separated"""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for x, z in points:
            writer.writerow([*x, *(repr(float(v)) for v in z)])


def optimality_gap(z: float, z_star: float) -> float:
    """
    (z* - z) / |z*| for a dual bound z and optimum z*.

    Raises:
        GapUndefinedError: |z*| < 1e-12 while z != z*
    """
    if z == z_star:
        return 0.0
    if abs(z_star) < GAP_ZERO_TOL:
        raise GapUndefinedError(f"gap undefined for optimum {z_star!r} and bound {z!r}")
    return (z_star - z) / abs(z_star)


def optimality_gap_report(z: float, z_star: float) -> Tuple[float, bool]:
    """
    Gap for reporting: relative when defined, absolute z* - z when z* = 0.

    Returns:
        (gap, is_absolute)
    """
    try:
        return optimality_gap(z, z_star), False
    except GapUndefinedError:
        return z_star - z, True

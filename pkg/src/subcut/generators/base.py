"""
Abstract base class for instance generators
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

from ..errors import GeneratorError
from ..milp import MilpInstance


class InstanceGenerator(ABC):  # pragma: no cover
    """Abstract base class for seeded MILP instance families"""

    @property
    @abstractmethod
    def name(self) -> str:
        """Family name used on the command line"""
        pass

    @property
    @abstractmethod
    def parameters(self) -> Dict[str, Any]:
        """Parameter names with their default values"""
        pass

    @abstractmethod
    def build(self, seed: int, **params) -> MilpInstance:
        """Generate one instance from fully resolved parameters"""
        pass

    def generate(self, seed: int, **params) -> MilpInstance:
        """Fill in defaults, reject unknown parameter names, then build"""
        unknown = sorted(set(params) - set(self.parameters))
        if unknown:
            raise GeneratorError(
                f"Unknown {self.name} parameter(s): {', '.join(unknown)} "
                f"(expected {', '.join(self.parameters)})"
            )
        resolved = {**self.parameters, **params}
        return self.build(seed, **resolved)

    def describe(self, instance: MilpInstance) -> str:
        return f"{self.name}: m={instance.m}, n={instance.n}, k={instance.k}"

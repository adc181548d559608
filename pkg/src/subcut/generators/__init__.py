"""
Seeded generators for the benchmark instance families
"""

from .base import InstanceGenerator
from .indepset import IndependentSetGenerator, generate_max_indep_set
from .mixed import RandomMixedGenerator, generate_random_mixed
from .setcover import SetCoverGenerator, generate_set_cover

__all__ = [
    "InstanceGenerator",
    "SetCoverGenerator",
    "IndependentSetGenerator",
    "RandomMixedGenerator",
    "generate_set_cover",
    "generate_max_indep_set",
    "generate_random_mixed",
]

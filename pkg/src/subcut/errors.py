"""
Exception hierarchy for subcut
"""

from typing import Optional


class SubcutError(Exception):
    """Base class for all subcut errors"""


class InstanceFormatError(SubcutError):
    """Malformed instance or checkpoint file"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class InstanceValidationError(SubcutError):
    """Well-formed file whose contents violate the data-model invariants"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class FormatVersionError(SubcutError):
    pass


class GeneratorError(SubcutError):
    """Invalid generator parameters or resampling failure"""


class EnumerationLimitError(SubcutError):
    pass


class GapUndefinedError(SubcutError):
    pass


class DimensionError(SubcutError):
    pass


class LogDomainError(SubcutError):
    """log(1 + phi) evaluated where phi <= -1"""


class LpError(SubcutError):
    """LP solve failed or returned an unusable status"""


class NumericalError(LpError):
    pass


class IterationLimitError(LpError):
    pass


class ConfigError(SubcutError):
    """Unknown key or mistyped value in a run configuration"""

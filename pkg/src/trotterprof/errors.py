"""Exception types shared across the package."""

from __future__ import annotations


class TrotterProfError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatchError(TrotterProfError):
    """Operands act on different qubit counts or amplitude lengths."""


class ResourceLimitError(TrotterProfError):
    """A dense realization would exceed the configured qubit cap."""


class DegenerateInputError(TrotterProfError):
    """Structurally unusable input: zero factor, duplicate grid point, flat probe."""


class HermiticityError(TrotterProfError):
    """An operator required to be Hermitian is not."""


class FormulaError(TrotterProfError):
    """Unknown product-formula name or an inconsistent step table."""


class SingularFitError(TrotterProfError):
    """Least-squares design matrix is rank deficient or too ill-conditioned."""

    def __init__(self, message: str, condition_number: float | None = None):
        super().__init__(message)
        self.condition_number = condition_number


class CalibrationError(TrotterProfError):
    """Empirical basis calibration could not produce a trustworthy fit."""


class ExtractionError(TrotterProfError):
    """Error-series extraction failed; usually the time window needs shrinking."""


class ConfigError(TrotterProfError):
    """Configuration document is syntactically or semantically invalid."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

"""Exception types shared across the package."""


class WmaVmdError(Exception):
    """Base class for all package errors."""


class InputDomainError(WmaVmdError, ValueError):
    """Input outside the operator's domain (NaN, length mismatch, ...)."""


class InsufficientDataError(WmaVmdError, ValueError):
    """Not enough samples or lags to carry out an estimate."""


class DegenerateTraceError(InsufficientDataError):
    """Trace carries no usable (non-stopped) frames."""


class SpecError(InputDomainError):
    """Invalid profile, noise or injection specification."""


class ConfigError(WmaVmdError, ValueError):
    """Invalid command configuration."""


class CompatibilityError(WmaVmdError, ValueError):
    """Model and trace do not match (channel count, sample interval)."""


class IngestionError(WmaVmdError, ValueError):
    """Malformed trace or model file."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class IllConditionedWarning(UserWarning):
    """Linear system for the optimal weights is numerically singular."""

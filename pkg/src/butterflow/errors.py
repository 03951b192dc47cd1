"""Exception hierarchy shared by every butterflow module."""

from __future__ import annotations


class ButterflowError(Exception):
    """Base class for all library errors."""


class InvalidConfigError(ButterflowError, ValueError):
    """Bad capacities, rationals, variants or job configuration."""


class UnsupportedVariantError(ButterflowError):
    """Operation is only defined for some network variants."""


class UnboundedRegionError(ButterflowError):
    """Geometric query on a region with a recession direction."""


class InfeasibleRateError(ButterflowError):
    """Rate pair lies outside the achievable region of a scheme.

    ``constraint`` holds the human-readable inequality that failed.
    """

    def __init__(self, message: str, constraint: str | None = None):
        super().__init__(message)
        self.constraint = constraint


class SecureImpossibleError(ButterflowError):
    """No positive secure rate exists on butterfly network 1."""


class FieldMismatchError(ButterflowError, ValueError):
    """Packets from different fields or of different lengths were combined."""


class AuditTooLargeError(ButterflowError):
    """Exhaustive enumeration would exceed the configured state budget."""


class PlanError(ButterflowError):
    """A plan asks a node to send something it does not hold."""

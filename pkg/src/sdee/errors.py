"""Shared exception types.

Every domain-level failure raised by this package derives from
:class:`SdeeError`, so callers (notably the CLI) can separate
domain errors from genuine bugs.
"""


class SdeeError(Exception):
    """Base class for all domain errors raised by this package."""


class UndefinedMetricError(SdeeError):
    """A metric is mathematically undefined for the given input."""


class InputError(SdeeError):
    """Caller supplied structurally invalid input (wrong shape, bad value)."""

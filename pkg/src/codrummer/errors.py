"""Error taxonomy shared across modules.

The buckets map onto CLI exit codes: UsageError -> 1, DataError -> 2,
RuntimeAbort -> 3.
"""

from __future__ import annotations


class CodrummerError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(CodrummerError):
    """Caller supplied inconsistent options or arguments."""


class DataError(CodrummerError):
    """Input data is malformed, missing, or violates a documented contract."""


class RuntimeAbort(CodrummerError):
    """A running job had to stop (divergence, repeated deadline misses, ...)."""

"""Exception hierarchy shared across the package."""


class AquaplaceError(Exception):
    """Base class for all errors raised by aquaplace."""


class ParseError(AquaplaceError):
    """Input file could not be decoded (malformed JSON/CSV)."""


class ValidationError(AquaplaceError, ValueError):
    """Input decoded fine but violates a documented invariant."""


class CapExceededError(AquaplaceError):
    """Exhaustive enumeration would exceed the configured cap."""

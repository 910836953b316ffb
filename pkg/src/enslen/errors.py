class EnslenError(Exception):
    """Base class for toolkit errors."""


class ArgumentError(EnslenError, ValueError):
    """An input violates a documented constraint."""


class PreconditionError(ArgumentError):
    """An operation was called outside its domain of validity."""


class ConstructionError(EnslenError, RuntimeError):
    """A numerical construction came out degenerate."""


class DecomposeFailure(EnslenError, RuntimeError):
    """Raised by the CLI layer when no decomposition met the tolerance."""

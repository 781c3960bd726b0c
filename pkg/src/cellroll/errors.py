"""Exception types shared across the library."""


class CellrollError(Exception):
    """Base class for all library-specific errors."""


class ConfigError(CellrollError):
    """Invalid configuration value; ``field`` is the dotted path to it."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class NumericalError(CellrollError):
    """A computation failed numerically (lost bracket, non-finite value)."""


class BreakpointCollisionError(CellrollError):
    """A smooth-regime evaluation hit a subdifferential breakpoint exactly.

    The caller should either mollify the potential or switch to the
    minimizing-movements solver, which handles set-valued forces.
    """

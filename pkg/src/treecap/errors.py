"""Exception types shared across the package."""


class TreecapError(Exception):
    """Base class; the CLI turns these into one-line diagnostics."""


class NetworkFormatError(TreecapError):
    """Raised when a network document cannot be parsed.

    Carries a human-readable location (field path or line number).
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class DimensionMismatchError(TreecapError):
    """Alphabet / tensor shape inconsistency between inputs."""


class CutClassificationError(TreecapError):
    """A node set passed as a cut cannot be classified; the set is not a
    valid cut (or enumeration produced a bad set, which is a bug)."""


class StateSpaceOverflowError(TreecapError):
    """Joint state space exceeds the exact-evaluation limit."""


class RowCapExceededError(TreecapError):
    """Fourier-Motzkin elimination exceeded the configured row cap."""


class ConvergenceError(TreecapError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

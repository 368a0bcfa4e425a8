"""Exception hierarchy shared across the package."""


class QkmError(Exception):
    """Base class for all package errors."""


class LayoutError(QkmError):
    """Invalid subsystem hierarchy parameters or layout mismatch."""


class ShapeError(QkmError):
    """Array length/shape does not match the expected contract."""


class DomainError(QkmError):
    """Value outside the mathematically valid domain (e.g. negative modulus)."""


class OracleSizeError(QkmError):
    """Brute-force oracle requested beyond its size cap."""


class FitError(QkmError):
    """Least-squares fit is underdetermined or fed degenerate data."""


class FormatError(QkmError):
    """On-disk trajectory container is malformed or truncated."""


class IntegrationError(QkmError):
    """Time integration produced non-finite values."""


class SymmetryError(QkmError):
    """Spectral data violates the conjugate symmetry required for a real field."""


class DegenerateError(QkmError):
    """Statistical estimate undefined for degenerate input (e.g. zero variance)."""

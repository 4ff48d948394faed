"""Exception hierarchy shared across the package."""


class CvmError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(CvmError):
    """Malformed dataset or model file."""


class NumericalError(CvmError):
    """Optimization or linear-algebra failure (non-convergence, bad matrix)."""

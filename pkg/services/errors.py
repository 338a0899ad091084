"""Exception hierarchy for evidencia.

Every error carries the process exit code the command line reports for it:
2 for bad input or usage, 3 for numerical or degeneracy failures.
"""


class EvidenciaError(Exception):
    """Base class for all evidencia errors."""

    exit_code = 2


# ---- input / usage -------------------------------------------------------

class InvalidUncertaintyError(EvidenciaError):
    """An experimental uncertainty sigma_n is not strictly positive."""
    pass


class OverparameterizedError(EvidenciaError):
    """More model parameters were requested than there are data points."""
    pass


class BasisExhaustedError(EvidenciaError):
    """The basis does not supply enough functions for the requested K."""
    pass


class InputFormatError(EvidenciaError):
    """An input file could not be parsed."""
    pass


class ConfigError(EvidenciaError):
    """A configuration value or command-line flag is invalid."""
    pass


class DomainError(EvidenciaError):
    """A special function or density was called outside its domain."""
    pass


# ---- numerical / degeneracy ----------------------------------------------

class SingularDesignError(EvidenciaError):
    """The Hessian X^T X is not numerically positive definite."""

    exit_code = 3


class DegenerateSpaceError(EvidenciaError):
    """A complete orthonormal noise-space basis could not be constructed."""

    exit_code = 3


class DegenerateSignalError(EvidenciaError):
    """A robust criterion needs F_K^2 > 0 but the signal vanished."""

    exit_code = 3


class NumericalError(EvidenciaError):
    """A series, iteration or quadrature failed to converge."""

    exit_code = 3

"""Exception hierarchy. CLI maps ParameterError to exit 2 and NumericalError to exit 3."""


class PTAAError(Exception):
    pass


class ParameterError(PTAAError, ValueError):
    """Invalid input parameters."""


class NumericalError(PTAAError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class SolverError(NumericalError):
    """Eigenvalue iteration did not converge.

    ``block`` is the (lo, hi) zero-based index range of the unconverged
    diagonal block.
    """

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class EvaluationError(NumericalError):
    """Characteristic polynomial evaluation overflowed at ``site`` (1-based)."""

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


class NoCrossingError(NumericalError):
    """The spectrum stayed real on the whole search interval."""

    def __init__(self, message, gamma_max=None):
        super().__init__(message)
        self.gamma_max = gamma_max


class AnalysisError(NumericalError):
    """Ambiguous conjugate pairing or non-adjacent breaking ranks."""


class PropagationOverflow(NumericalError):
    """Amplitudes left the representable range during time evolution."""

    def __init__(self, message, last_valid_time=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time

"""Exception hierarchy shared by all modules."""


class SSHError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(SSHError, ValueError):
    pass


class DimensionMismatch(SSHError, ValueError):
    pass


class ConvergenceFailure(SSHError, RuntimeError):
    """The dense eigensolver did not converge."""


class AmbiguousKernel(SSHError):
    """An eigenvalue sits just outside the zero tolerance, inside (tol, 10*tol)."""


class GapClosed(SSHError):
    pass


class NotNormalizable(SSHError):
    """The zero-energy solution grows along a tail, so there is no zero mode."""


class NearSingular(SSHError, ArithmeticError):
    pass


class QuadratureNotConverged(SSHError):
    pass


class PerturbationTooLarge(SSHError, ValueError):
    pass


class DegenerateFit(SSHError):
    pass


class NotConverged(SSHError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PositivityViolated(SSHError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class GapUsageError(SSHError):
    pass


class InsufficientTail(SSHError):
    pass


class NonDecaying(SSHError):
    pass


class SupportTooWide(SSHError, ValueError):
    pass

"""Exception hierarchy shared by all modules."""


class ResponsumError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(ResponsumError, ValueError):
    """A problem instance or configuration violates an invariant."""


class ParseError(ResponsumError, ValueError):
    """A configuration file could not be read."""


class NonConvergence(ResponsumError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class DegenerateMinimum(ResponsumError):
    """The located critical point has a (numerically) singular Hessian."""


class HypothesisViolation(ResponsumError):
    """The linearisation at the expansion point is not positive definite."""


class NotPositiveDefinite(ResponsumError, ValueError):
    pass


class SingularMatrix(ResponsumError, ArithmeticError):
    pass


class EpsilonTooLarge(ResponsumError, ValueError):
    """The norm bound was requested outside its range of validity."""


class OrderTooLarge(ResponsumError, ValueError):
    pass


class ComplexLeak(ResponsumError):
    """A field that should be real picked up an imaginary part."""


class StepFailure(ResponsumError, RuntimeError):
    """The time integrator could not complete a step at the minimum step size."""


class InsufficientData(ResponsumError, ValueError):
    pass

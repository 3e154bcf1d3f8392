"""Exception hierarchy shared across the package."""


class QuarticSosError(Exception):
    """Base class for all errors raised by quarticsos."""


class DimensionMismatch(QuarticSosError, ValueError):
    pass


class ModelFormatError(QuarticSosError, ValueError):
    """Raised when a model file cannot be parsed or violates the schema."""


class NonSymmetric(QuarticSosError, ValueError):
    pass


class NuOutOfRange(QuarticSosError, ValueError):
    pass


class NotStationary(QuarticSosError):
    """The candidate point is not a stationary point of the model.

    Carries the gradient residual so callers can report it.
    """

    def __init__(self, residual, tol):
        super().__init__(f"gradient norm {residual:.3e} exceeds tolerance {tol:.3e}")
        self.residual = residual
        self.tol = tol


class WrongDimension(QuarticSosError, ValueError):
    pass


class NonzeroTensor(QuarticSosError, ValueError):
    pass


class TensorShapeMismatch(QuarticSosError, ValueError):
    pass


class NonFinite(QuarticSosError, FloatingPointError):
    pass


class SolveFailed(QuarticSosError):
    pass


class Unbounded(QuarticSosError):
    pass


class UnknownProblem(QuarticSosError, KeyError):
    pass


class OracleFailure(QuarticSosError):
    pass


class Stalled(QuarticSosError):
    pass

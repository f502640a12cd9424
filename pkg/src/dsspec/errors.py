"""Exception hierarchy shared by all modules."""


class DssError(Exception):
    """Base class for every error raised by the package."""


class StructuralError(DssError, ValueError):
    """Inconsistent dimensions or malformed input arrays."""


class BoundaryMatrixError(StructuralError):
    """A boundary matrix is not in the admissible set (aa* = I, aJa* = 0)."""


class PropagationOverflowError(DssError, FloatingPointError):
    pass


class EigenvalueProximityError(DssError, ArithmeticError):
    """The spectral parameter sits on (or numerically next to) an eigenvalue."""

    def __init__(self, message, lam=None, sigma_ratio=None):
        super().__init__(message)
        self.lam = lam
        self.sigma_ratio = sigma_ratio


class AtkinsonError(DssError, ArithmeticError):
    """The weak Atkinson (definiteness) condition fails."""


class DegenerateSpectrumError(DssError, ArithmeticError):
    """Every complex number is an eigenvalue (characteristic polynomial vanishes)."""


class NumericalConsistencyError(DssError, ArithmeticError):
    """A property guaranteed by theory was not reproduced numerically."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class RankError(DssError, ArithmeticError):
    pass


class PreconditionError(DssError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainError(DssError, ValueError):
    pass


class IntegrandSingularityError(DssError, ArithmeticError):
    pass

"""Exception hierarchy shared by all modules."""


class MetaplecticError(Exception):
    """Base class for library errors."""


class ValidationError(MetaplecticError, ValueError):
    """Bad user input: wrong shapes, exponents, grids, conventions."""


class InvalidDimensionError(ValidationError):
    pass


class InvalidInputError(ValidationError):
    pass


class NotFreeError(ValidationError):
    """A free symplectic matrix (invertible B block) was required."""


class MaslovParityError(ValidationError):
    pass


class DivergentGaussianError(ValidationError):
    pass


class StabilityError(ValidationError):
    pass


class UnsupportedHamiltonianError(ValidationError):
    pass


class InvalidComparisonError(ValidationError):
    pass


class InvalidExponentError(ValidationError):
    pass


class NumericalError(MetaplecticError):
    """The computation itself broke down."""


class FactorizationError(NumericalError):
    pass


class AliasingRiskError(NumericalError):
    pass

"""Exception types raised across the package."""


class NCTorusError(Exception):
    """Base class for all domain errors."""


class SingularBasis(NCTorusError):
    pass


class MoyalNotClosed(NCTorusError):
    """Both star factors carry exponents that are quadratic in y."""


class DegreeOverflow(NCTorusError):
    pass


class SingularT(NCTorusError):
    pass


class NotPositiveDefinite(NCTorusError):
    pass


class SingularDeformation(NCTorusError):
    """det(I + theta*Acal/2pi) (or a related determinant) vanishes."""


class HypothesisViolated(NCTorusError):
    pass


class UnsupportedT(NCTorusError):
    pass


class TruncationInsufficient(NCTorusError):
    pass


class PreconditionFailed(NCTorusError):
    pass


class IntegralityViolated(NCTorusError):
    pass


class ContextMismatch(NCTorusError):
    pass


class SingularSlope(NCTorusError):
    pass


class UnknownIdentity(NCTorusError):
    pass


class DimensionMismatch(NCTorusError):
    pass


class ValidationError(NCTorusError):
    """Scenario validation failure; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field

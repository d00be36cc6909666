"""Exception types shared across the toolkit."""


class PhifluidError(Exception):
    """Base class for all toolkit errors."""


class OutOfChart(PhifluidError):
    """Point lies outside the chart's validity box."""


class OrderExceeded(PhifluidError):
    """Requested derivative order exceeds the declared smoothness."""


class DimensionMismatch(PhifluidError):
    pass


class SingularMetric(PhifluidError):
    """det g below the degeneracy guard."""


class DimensionTooSmall(PhifluidError):
    """Operation requires m >= 3."""


class MissingField(PhifluidError):
    pass


class BoundaryPoint(PhifluidError):
    """u below the regularity threshold."""


class CriticalPoint(PhifluidError):
    """|grad f| below the regularity threshold."""


class MissingProfile(PhifluidError):
    pass


class HypothesisUnmet(PhifluidError):
    """An identity's declared hypothesis fails; the failing item is named."""


class DerivativeBudget(PhifluidError):
    """Computation would need more derivative orders than available."""


class AlphaNonPositive(PhifluidError):
    """Sufficiency battery requires alpha > 0."""


class NotPSD(PhifluidError):
    pass


class KOutOfRange(PhifluidError):
    pass


class NotClosed(PhifluidError):
    """Quadrature target is not a closed manifold."""


class NotCodazzi(PhifluidError):
    pass


class UPositivityViolated(PhifluidError):
    pass


class ProfileSingular(PhifluidError):
    """1/v unbounded inside the integration domain."""


class NoConvergence(PhifluidError):
    pass


class TailDivergent(PhifluidError):
    """1/h is not integrable at infinity; critical curve undefined."""


class UnsupportedFamily(PhifluidError):
    pass


class SamplerFailure(PhifluidError):
    pass


class ParseError(PhifluidError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownCheckId(PhifluidError):
    pass


class SchemaMismatch(PhifluidError):
    pass

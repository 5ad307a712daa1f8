"""Exception hierarchy. The CLI maps each family to a fixed exit code."""


class StrongFieldError(Exception):
    """Base class for all library errors."""


class UnknownPresetError(StrongFieldError, ValueError):
    pass


class ChartError(StrongFieldError, ValueError):
    """A point lies outside the domain of its chart."""


class ExcludedPointError(ChartError):
    pass


class ChartBoundaryError(ChartError):
    """A finite-difference stencil or integration step left the chart."""


class RankRefusalError(StrongFieldError):
    """Leaf tracing refused: the null space is empty or everything is null."""


class AmbiguousNullSpaceError(StrongFieldError):
    pass


class DegeneratePathError(StrongFieldError, ValueError):
    pass


class RankBoundaryError(StrongFieldError):
    """The Dirac bracket is undefined because the rank of F jumps nearby."""


class DivergentIntegralError(StrongFieldError, ValueError):
    pass


class QuadratureError(StrongFieldError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class CrossCheckError(StrongFieldError):
    pass


class NoLambdaFoundError(StrongFieldError):
    pass

"""Exception types raised by the library.

Every error derives from :class:`TriangleRepError` so callers (the CLI in
particular) can map library failures to a single exit status.
"""


class TriangleRepError(Exception):
    """Base class for all library errors."""


class InvalidSignature(TriangleRepError, ValueError):
    pass


class TypeOutOfRange(TriangleRepError, ValueError):
    pass


class ZeroParameter(TriangleRepError, ValueError):
    pass


class UndefinedParameter(TriangleRepError, ValueError):
    """A t-dependent operation was asked of a single-point type (some c_k = 0)."""


class RelationViolation(TriangleRepError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (worst residual {residual:.3e})")
        self.residual = residual


class DegenerateConic(TriangleRepError):
    pass


class PointOnChartLine(TriangleRepError):
    pass


class CoincidentPoints(TriangleRepError):
    pass


class NotCollinear(TriangleRepError):
    pass


class EvenSignature(TriangleRepError, ValueError):
    pass


class FormNotFound(TriangleRepError):
    pass


class NotHyperbolic(TriangleRepError):
    pass


class DomainError(TriangleRepError, ValueError):
    pass


class BracketingFailed(TriangleRepError):
    pass


class NotBarbotType(TriangleRepError, ValueError):
    pass


class ComplexCoxeter(TriangleRepError):
    pass


class OrderViolation(TriangleRepError):
    pass


class ChartCrossing(TriangleRepError):
    pass


class NoContraction(TriangleRepError):
    pass


class NotInBarbotRange(TriangleRepError, ValueError):
    pass


class ConfigError(TriangleRepError, ValueError):
    pass

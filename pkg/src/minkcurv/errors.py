"""Exception types raised by the geometry routines."""


class GeometryError(Exception):
    """Base class for all numerical-geometry failures."""


class InvalidInput(GeometryError, ValueError):
    pass


class NonConvergence(GeometryError):
    pass


class DegenerateCurvature(GeometryError):
    pass


class DegenerateChart(GeometryError):
    pass


class QuadratureNotConverged(GeometryError):
    pass


class TangencyViolation(GeometryError):
    pass


class NonPositiveMeanCurvature(GeometryError):
    pass


class NonPositiveCurvature(GeometryError):
    pass


class OrientationError(GeometryError):
    pass


class SingularOffset(GeometryError):
    pass


class UnsafeOffset(GeometryError):
    pass


class FlatPoint(GeometryError):
    pass


class RayEscapedAtlas(GeometryError):
    pass


class StepSizeUnderflow(GeometryError):
    pass


class ConfigError(Exception):
    """Raised for malformed run configurations; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

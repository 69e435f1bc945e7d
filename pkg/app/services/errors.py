"""Exceptions raised by the benchmark services."""


class BenchmarkError(Exception):
    """Base class for every benchmark failure."""


class ValidationError(BenchmarkError, ValueError):
    """A precondition on the inputs was violated."""


class InvalidTopology(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class DisconnectedSubgraph(ValidationError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class VertexOutOfRange(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class NonCliffordGate(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class EmptyCounts(ValidationError):
    pass


class WrongArity(ValidationError):
    pass


class NotAnEdge(ValidationError):
    pass


class SingularCalibration(ValidationError):
    pass


class WidthMismatch(ValidationError):
    pass


class GroupTooLarge(ValidationError):
    pass


class EmptySeries(ValidationError):
    pass


class ConstantSeries(ValidationError):
    pass


class NoPath(BenchmarkError):
    pass


class OrbitTruncated(UserWarning):
    """Orbit enumeration stopped at its limit before the closure completed."""

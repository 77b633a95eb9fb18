"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: configuration problems exit with 2,
resolution and convergence problems with 3, internal consistency
failures with 4.
"""


class DegreeLabError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(DegreeLabError, ValueError):
    """Invalid parameters, descriptors or mesh settings."""


class DomainError(ConfigurationError):
    """Argument outside the mathematical domain of an operation."""


class EvaluationError(DegreeLabError, ArithmeticError):
    """A function evaluation produced a non-finite value."""


class InvariantViolation(ConfigurationError):
    """An object violates one of its defining invariants."""


class ResolutionError(DegreeLabError):
    """The mesh is too coarse for the requested computation."""


class UnderResolutionError(ResolutionError):
    """A grid scan could not resolve a cell unambiguously."""


class NonIntegralDegreeError(ResolutionError):
    """A degree quadrature landed too far from an integer."""

    def __init__(self, raw, message=None):
        self.raw = raw
        super().__init__(message or f"non-integral degree estimate {raw!r}")


class SingularLocusError(DegreeLabError):
    """Differential requested on the non-smooth locus of a map."""


class RegularValueError(DegreeLabError):
    """The requested target value is not a usable regular value."""


class InternalConsistencyError(DegreeLabError):
    """Two routes to the same quantity disagree."""

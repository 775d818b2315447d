"""Exception types shared across the package."""


class TricandsError(Exception):
    """Base class for all package-specific errors."""


class DimensionTooSmall(TricandsError):
    """Fewer than d+1 points: no full-dimensional hull exists."""


class DegenerateInput(TricandsError):
    """Points are affinely dependent (rank < d), even after joggling."""


class TriangulationFailed(TricandsError):
    """Joggle retries exhausted without a valid Delaunay triangulation."""


class DegenerateSimplex(TricandsError):
    """Simplex volume below tolerance; circumsphere undefined."""


class NormalDegenerate(TricandsError):
    """Hull facet normal is not unit length within tolerance."""


class BadIndex(TricandsError):
    """Index outside the design's valid range."""


class TooFewPoints(TricandsError):
    """Design too small to triangulate (n < d+1)."""


class EmptyCandidates(TricandsError):
    """Candidate-based acquisition called with zero candidates."""


class SingularKernel(TricandsError):
    """Kernel matrix not factorable at the current nugget (retried internally)."""


class FitFailed(TricandsError):
    """GP hyperparameter fit failed even after nugget escalation."""


class CovNotPSD(TricandsError):
    """Predictive covariance not positive semi-definite after jitter ladder."""


class DimensionMismatch(TricandsError):
    """Input vector length does not match the benchmark dimension."""


class MissingStrategy(TricandsError):
    """Summary requested for a strategy with no run records."""


class ConfigError(TricandsError):
    """Experiment configuration file could not be parsed."""

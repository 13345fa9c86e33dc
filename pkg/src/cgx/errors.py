"""Exception types shared across the toolkit."""


class CgxError(Exception):
    """Base class for all toolkit errors."""


class BodySpecError(CgxError):
    """Malformed body description (bad JSON, bad field, broken invariant)."""


class DimensionMismatch(CgxError):
    """Operands live in different ambient dimensions."""


class UnboundedGauge(CgxError):
    """Gauge query escaped the body's span (cannot occur for well-formed specs)."""


class NonConvexBody(CgxError):
    """Operation requires convexity (support, polar, hit-and-run chords)."""


class NonConvexPolar(NonConvexBody):
    """Polarity requested for a star-only body."""


class SingularMap(CgxError):
    """Linear map is not invertible."""


class UnsupportedKind(CgxError):
    """Requested quadrature rule kind is not available in this dimension."""


class BadRank(CgxError):
    """Subspace rank outside 1..n-1."""


class LogOfZero(CgxError):
    """Zeroth mean norm hit a zero/unbounded gauge value."""


class NumericOverflow(CgxError):
    """Integrand left the representable range (reports the offending direction)."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class NoConvergence(CgxError):
    """Iterative solver exhausted its budget; carries the residual trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class DegenerateBody(CgxError):
    """Covariance (or similar) numerically singular."""


class DegeneratePoints(CgxError):
    """Point set does not span the ambient space."""


class DegeneratePolytope(CgxError):
    """Randomly generated polytope was rank-deficient."""


class InsufficientContacts(CgxError):
    """John decomposition could not reach the target residual."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class RejectionTooSlow(CgxError):
    """Rejection sampling acceptance rate below threshold; try hit_and_run."""


class FacetAreaFailure(CgxError):
    """Facet area computation failed for a polytope."""


class ContainmentViolated(CgxError):
    """A check's K-inside-L precondition failed numerically."""


class RankOutOfRange(CgxError):
    """Section rank outside the range a theorem-check allows."""


class UnknownCheck(CgxError):
    """Check id not present in the catalog."""

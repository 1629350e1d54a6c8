"""Exception hierarchy shared across the library."""


class CutoffLabError(Exception):
    """Base class for all library-specific errors."""


class NotIrreducible(CutoffLabError):
    """The transition matrix is not irreducible."""


class AsymmetricSupport(CutoffLabError):
    """P(x,y) > 0 does not imply P(y,x) > 0."""


class InvalidTolerance(CutoffLabError):
    """Tolerance outside the accepted range."""


class DimensionMismatch(CutoffLabError):
    """Vectors or matrices with incompatible shapes."""


class UnsupportedState(CutoffLabError):
    """A distribution charges a state where the reference law vanishes."""


class NoCrossing(CutoffLabError):
    """Bisection target is not bracketed."""


class UnderflowRisk(CutoffLabError):
    """Heat-kernel entries too small to take logarithms safely."""


class HypothesisViolation(CutoffLabError):
    """An inequality was invoked outside its stated hypothesis."""


class CurvatureHypothesisFailed(CutoffLabError):
    """The chain is not certified non-negatively curved."""


class NotGenerating(CutoffLabError):
    """The generator set does not generate the group."""


class NotSymmetricSet(CutoffLabError):
    """The generator multiset is not closed under negation."""


class GenerationFailed(CutoffLabError):
    """Random generator draws failed to produce a generating set."""


class StateCapExceeded(CutoffLabError):
    """Requested chain exceeds the configured state-space cap."""


class SpecParseError(CutoffLabError):
    """Malformed family spec or chain file."""


class CacheCorrupt(CutoffLabError):
    """A cache entry could not be read back."""

"""Exception types shared across the package."""


class TreelamError(Exception):
    """Base class for all package-specific errors."""


class ConstraintViolation(TreelamError):
    """Degree counts do not satisfy the tree constraint sum N_i = 1 + sum i*N_i."""


class Empty(TreelamError):
    """Degree sequence has no vertices at all."""


class NotNormalized(TreelamError):
    """sigma^2 + sum beta_i^2 differs from 1 beyond tolerance (strict mode)."""


class TooFewPoints(TreelamError):
    """A family diagnostic needs at least two entries."""


class NotExcursion(TreelamError):
    """Integer path is not a valid Lukasiewicz excursion."""


class DuplicateWeights(TreelamError):
    """Edge weights must be pairwise distinct."""


class DegreeMismatch(TreelamError):
    """Supplied degree sequence does not match the tree."""


class TooLarge(TreelamError):
    """Instance exceeds the guard size for exhaustive enumeration."""


class NotABridge(TreelamError):
    """Grid path does not have both endpoints at zero."""


class NotLaminar(TreelamError):
    """Positive splits are incompatible (no tree assembles them)."""


class CrossingChords(TreelamError):
    """Chord set is not a lamination: two chords cross in the open disk."""


class TooFewSamples(TreelamError):
    """Statistical routine called with too few samples."""


class Infeasible(TreelamError):
    """Degree-sequence builder cannot satisfy the tree constraint."""

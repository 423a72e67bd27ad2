"""Exception types raised across the package."""


class ZeroNormPoint(ValueError):
    """A data point has (numerically) zero Euclidean norm and cannot be
    placed on the unit sphere."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"point {index} has zero norm")


class OrthogonalPoint(ValueError):
    """The candidate point is orthogonal to the anchor, so its inverse-cosine
    dissimilarity and stretch factor are undefined."""


class EmptyNeighborhood(ValueError):
    """Every other point is orthogonal to the anchor; no neighborhood can be
    formed."""

    def __init__(self, anchor):
        self.anchor = anchor
        super().__init__(f"no usable neighbors for anchor {anchor}")


class DegenerateNearest(ValueError):
    """The nearest stretched neighbor is not a unique point distinct from the
    anchor, so the penalty lower bound is undefined."""


class NotConverged(RuntimeError):
    """The solver hit its iteration cap without meeting the step tolerance or
    the optimality certificate.  Carries the best iterate so the caller can
    decide whether to accept it."""

    def __init__(self, iterations, last_delta, best=None):
        self.iterations = iterations
        self.last_delta = last_delta
        self.best = best
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last step delta {last_delta:.3e})"
        )


class DegenerateCluster(ValueError):
    """A cluster holds fewer points than the subspace dimension to fit."""

    def __init__(self, cluster, size):
        self.cluster = cluster
        self.size = size
        super().__init__(f"cluster {cluster} has {size} points, too few to fit")


class InfeasibleLabels(ValueError):
    """More distinct class labels were supplied than clusters requested."""


class BudgetExceedsUnlabelled(ValueError):
    """A query budget larger than the number of unlabelled points."""


class DataError(ValueError):
    """Base class for malformed input data files."""


class MalformedIdx(DataError):
    """An IDX file violates the format (bad magic, truncated payload, or
    mismatched counts)."""

    def __init__(self, offset, reason):
        self.offset = offset
        self.reason = reason
        super().__init__(f"malformed IDX data at byte {offset}: {reason}")

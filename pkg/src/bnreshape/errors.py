"""Exception types shared across the package."""


class BNError(Exception):
    """Base class for every error raised by bnreshape."""


class NetworkError(BNError, ValueError):
    """Malformed network, unknown node id, or an illegal structural operation."""


class EvidenceError(NetworkError):
    """Evidence that does not fit the network, or has zero probability."""


class MappingError(NetworkError):
    """A refinement/coarsening map or split that does not fit the target."""


class RefinementRejected(BNError):
    """A refinement whose CPTs would change the joint over untouched nodes."""

    def __init__(self, message, max_deviation=None):
        super().__init__(message)
        self.max_deviation = max_deviation


class NotCoarsenable(BNError):
    """Exact coarsening is impossible; ``report`` holds the deviation details."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report

"""Exception types shared across the package."""


class NpdgError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteMatrixError(NpdgError):
    """A matrix argument contains NaN or infinite entries."""


class SolverError(NpdgError):
    """Base class for Riccati solver failures."""


class NotStabilizableError(SolverError):
    """No stabilizing solution could be found."""


class MaxIterationsError(SolverError):
    """Iteration budget exhausted before the residual tolerance was met."""


class DivergedError(SolverError):
    """Iterates blew up past the divergence guard."""


class BlockMismatchError(NpdgError):
    """Potential block layout does not match the game's input widths."""


class GridMismatchError(NpdgError):
    """Two trajectories do not share the same time grid."""


class NotNormalizedError(NpdgError):
    """Potential input penalty has spectral norm <= 1; rescale first."""


class PartitionError(NpdgError):
    """Interval partition has gaps, overlaps, or does not cover the grid."""


class GameFileError(NpdgError):
    """A game file could not be parsed or violates the schema."""

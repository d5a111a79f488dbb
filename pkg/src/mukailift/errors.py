"""Typed failure modes shared by all modules.

Domain failures (bad inputs, degenerate geometry, tracking breakdowns) are
distinct from I/O and parse problems so the CLI can map them to exit codes.
"""


class MukaiError(Exception):
    """Base class for all domain failures."""


class SingularMatrix(MukaiError):
    """A pivot fell below the singularity tolerance during LU."""


class RankDeficient(MukaiError):
    """A matrix expected to have full (column) rank does not."""


class ZeroVector(MukaiError):
    """A projective comparison received a zero vector."""


class NotSelfDual(MukaiError):
    """No invertible diagonal witness for the configuration exists."""


class CayleySingular(MukaiError):
    """The orthogonal factor has an eigenvalue at -1; no Cayley preimage."""


class DegenerateConfig(MukaiError):
    """Two columns of a configuration coincide as projective points."""


class WrongCount(MukaiError):
    """A tracking stage did not produce the expected number of solutions."""


class RecoveryFailed(MukaiError):
    """Pulling a sliced point back through the section left a large residual."""


class StartResidualTooLarge(MukaiError):
    """A freshly built start pair does not satisfy its own equations."""


class PathFailed(MukaiError):
    """The single tracked path of a lift did not reach the target."""

    def __init__(self, message, path_result=None):
        super().__init__(message)
        self.path_result = path_result


class ResidualCheckFailed(MukaiError):
    """The composed embedding failed the independent residual verification."""


class BezoutOverflow(MukaiError):
    """A total-degree start system would exceed the path-count cap."""


class InputError(Exception):
    """Malformed input file or JSON payload (CLI exit code 3)."""

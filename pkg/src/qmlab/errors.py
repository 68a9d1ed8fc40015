"""Exception and warning types shared across the package."""


class QmlabError(Exception):
    """Base class for all qmlab errors."""


class InvalidSpecError(QmlabError, ValueError):
    """A grid, plan, potential or model parameter violates its invariants."""


class GridMismatchError(QmlabError, ValueError):
    """Two fields that must share a grid were sampled on different grids."""


class NotNormalizedError(QmlabError, ValueError):
    """An operation requiring a normalized wavefunction received one that is not."""


class LinearSolveError(QmlabError, RuntimeError):
    """The implicit time-step system could not be solved (bad dt/grid combination)."""


class EigensolverError(QmlabError, RuntimeError):
    """The tridiagonal eigensolver failed to converge."""


class AllMaskedError(QmlabError, ValueError):
    """Every grid point fell below the node threshold; no fields can be extracted."""


class InsufficientSnapshotsError(QmlabError, ValueError):
    """Residual evaluation needs at least three consecutive time snapshots."""


class EmptyGridError(QmlabError, ValueError):
    """A scan received an empty or too-narrow angle grid."""


class UnsupportedModelError(QmlabError, ValueError):
    """The requested closed form does not exist for this model."""


class ConfigError(QmlabError, ValueError):
    """An experiment config file could not be parsed or names an unknown experiment."""


class ValidationError(QmlabError, ValueError):
    """An experiment config failed precondition validation.

    Carries the full violation report in ``violations``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class GridTooCoarseWarning(UserWarning):
    """A Hermitian expectation value produced an imaginary residue above tolerance."""

"""Exception hierarchy shared by every ctrlscore module."""


class ControlScoreError(Exception):
    """Base class for all errors raised by ctrlscore."""


class SchurConvergenceError(ControlScoreError):
    """The QR iteration behind the real Schur form did not converge."""


class SylvesterError(ControlScoreError):
    """A Sylvester equation has no unique solution (eigenvalue sums near zero)."""


class NotHurwitzError(ControlScoreError):
    """A Lyapunov solve was requested for a matrix that is not Hurwitz."""


class AssumptionViolation(ControlScoreError):
    """The system matrix violates a structural assumption of the requested computation.

    ``eigenvalues`` carries the offending eigenvalues when there are any.
    """

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues)


class HorizonOverflowError(ControlScoreError, OverflowError):
    """exp(A T) or a Gramian built from it is not representable in float64.

    ``safe_horizon`` is an estimate of the largest horizon that still fits.
    """

    def __init__(self, message, safe_horizon=None):
        super().__init__(message)
        self.safe_horizon = safe_horizon


class NotPositiveDefinite(ControlScoreError):
    """The assembled Gramian is not (numerically) positive definite at the given allocation."""


class StagnationError(ControlScoreError):
    """The Armijo backtracking shrank the step below the underflow threshold."""


class NetworkSpecError(ControlScoreError, ValueError):
    """An edge list or network specification is malformed."""

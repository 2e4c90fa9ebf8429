"""Exception types raised by the specrelax package."""


class SpecRelaxError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(SpecRelaxError):
    """Vector or matrix shapes are incompatible."""


# --- chain construction / validation ---

class RowSumError(SpecRelaxError):
    """A kernel row does not sum to one within tolerance."""


class NotReversible(SpecRelaxError):
    """Detailed balance fails beyond tolerance."""


class Reducible(SpecRelaxError):
    """The positive-entry digraph of the kernel is not strongly connected."""


class DegeneratePi(SpecRelaxError):
    """The stationary distribution has a nonpositive entry."""


class EigensolveFailure(SpecRelaxError):
    """The symmetric eigensolver did not converge."""


class InvalidSize(SpecRelaxError):
    """State count outside the supported range."""


class InvalidLaziness(SpecRelaxError):
    """Laziness parameter outside (0, 1]."""


class NonRealizable(SpecRelaxError):
    """No nonnegative kernel with the requested spectrum was found."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


# --- trajectories ---

class ZeroProjection(SpecRelaxError):
    """The centered initial vector has no energy in the nontrivial modes."""


class DeadTrajectory(SpecRelaxError):
    """Operation requires positive energy but the trajectory has died."""


class NoSlowMode(SpecRelaxError):
    """The maximal-eigenvalue mode carries no weight in this profile."""


# --- rigidity ---

class InvalidArguments(SpecRelaxError):
    """Arguments violate an operation precondition."""


class TooShort(SpecRelaxError):
    """Energy sequence too short for rigidity detection."""


class PreconditionUnmet(SpecRelaxError):
    """Step is below the rigidity time required by the bound."""


# --- thermodynamics ---

class NotADistribution(SpecRelaxError):
    """Input is not a probability vector within tolerance."""


class Degenerate(SpecRelaxError):
    """Slow and fast eigenvalues coincide; the quantity is undefined."""


class NonConvergent(SpecRelaxError):
    """Spectral entropy does not vanish (degenerate slow cluster)."""


class DeadMode(SpecRelaxError):
    """Requested mode has already dissipated completely."""


# --- power iteration ---

class Stalled(SpecRelaxError):
    """Iteration energy underflowed even in log tracking (reserved)."""


class InvalidRho(SpecRelaxError):
    """Energy ratio outside the admissible range."""


class OutOfRange(SpecRelaxError):
    """Scalar argument outside its admissible interval."""


class StreamEnded(SpecRelaxError):
    """The rho stream was exhausted before the stopping rule fired."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class TauCollapse(SpecRelaxError):
    """Online separation estimate fell below the floor."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


# --- acceleration ---

class InvalidInterval(SpecRelaxError):
    """Suppression interval is empty or does not exclude the fixed point."""


class SlowModeSuppressed(SpecRelaxError):
    """The plan damps the slow mode at least as hard as the fast interval."""


# --- first passage ---

class InvalidState(SpecRelaxError):
    """Target state index out of range."""


class BadStart(SpecRelaxError):
    """Start distribution invalid or supported on the absorbing state."""


# --- cli ---

class ConfigError(SpecRelaxError):
    """Run configuration is invalid."""


class IoError(SpecRelaxError):
    """Input file missing or malformed."""

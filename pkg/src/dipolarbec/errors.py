"""Exception types shared across the package."""


class DipolarBecError(Exception):
    """Base class for all errors raised by this package."""


class ZeroDivisor(DipolarBecError):
    """A bicomplex value with a vanishing idempotent component was inverted.

    Callers should treat this like a singular matrix pivot.
    """


class DomainError(DipolarBecError):
    """Arguments outside the domain of a special function."""


class NoConvergence(DipolarBecError):
    """An iteration failed to converge within its cap."""

    def __init__(self, message, last_value=None):
        super().__init__(message)
        self.last_value = last_value


class SingularSystem(DipolarBecError):
    """A linear system had a pivot below the underflow threshold."""


class FoldEncountered(DipolarBecError):
    """Adiabatic branch following hit a turning point of the branch.

    Attributes:
        last_good_param: last parameter value where the solve converged.
        last_good_state: the converged state at that parameter.
    """

    def __init__(self, message, last_good_param=None, last_good_state=None):
        super().__init__(message)
        self.last_good_param = last_good_param
        self.last_good_state = last_good_state


class AmbiguousMatching(DipolarBecError):
    """Two candidate state matchings were too close to decide a permutation."""


class IllConditioned(DipolarBecError):
    """A fit was attempted on data that does not constrain all parameters."""

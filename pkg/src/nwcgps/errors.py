"""Exception hierarchy shared by every module of the package."""


class GPSError(Exception):
    """Base class for all errors raised by nwcgps."""


class ParameterDomainError(GPSError, ValueError):
    """Model parameters outside the admissible domain."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UnstableSystemError(GPSError):
    """The analytic pipeline was asked to work with an unstable parameter set."""


class NumericalError(GPSError):
    """A numerical procedure failed; maps to exit code 3 in the CLI."""


class OrderingViolation(NumericalError):
    pass


class OnCut(GPSError, ValueError):
    """Evaluation point lies on a branch cut; pick a side explicitly."""


class PoleAtZero(GPSError, ValueError):
    pass


class KernelZero(GPSError, ValueError):
    pass


class BranchAmbiguity(NumericalError):
    pass


class NearSingularity(GPSError, ValueError):
    pass


class MultipleSingularities(NumericalError):
    pass


class PoleOfAlpha(GPSError, ValueError):
    pass


class AtPole(GPSError, ValueError):
    pass


class PoleEncountered(AtPole):
    pass


class PhaseAliasing(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class WindowUnreliable(GPSError, ValueError):
    pass

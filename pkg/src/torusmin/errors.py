"""Exception hierarchy shared by all torusmin modules."""


class TorusminError(Exception):
    """Base class for every error raised by this package."""


class NotSquare(TorusminError):
    pass


class NotUnimodular(TorusminError):
    pass


class NotSaturated(TorusminError):
    pass


class RankDeficient(TorusminError):
    pass


class IntervalTooWide(TorusminError):
    """A phase enclosure is at least one full turn wide; extend the partial sum."""


class NotMonic(TorusminError):
    pass


class NotIntegerCoefficients(TorusminError):
    pass


class PrecisionExhausted(TorusminError):
    """Root disks still straddle the unit circle at the maximal working precision."""

    def __init__(self, msg, undecided=0):
        super().__init__(msg)
        self.undecided = undecided


class NotADivisor(TorusminError):
    pass


class NoEigenvalueOne(TorusminError):
    pass


class NotQuasiUnipotent(TorusminError):
    pass


class BadTarget(TorusminError):
    pass


class EnclosureTooWide(TorusminError):
    pass


class UnknownCase(TorusminError):
    pass


class PrecisionInsufficient(TorusminError):
    pass


class NotConstructible(TorusminError):
    pass


class UnsupportedBranch(TorusminError):
    pass


class NotHyperbolic(TorusminError):
    pass


class NoConvergence(TorusminError):
    pass


class BranchMismatch(TorusminError):
    pass


class NotDiophantineCertified(TorusminError):
    pass


class SingularDivisor(TorusminError):
    pass


class ErrorBudgetExhausted(TorusminError):
    pass

"""Exception hierarchy shared by all ks_forge modules."""


class KsForgeError(Exception):
    """Base class for every error raised by ks_forge."""


class NumericDomain(KsForgeError, ValueError):
    """A closed-form quantity left its real domain beyond the clamp window."""


class DegeneratePair(KsForgeError, ValueError):
    """Two rays are parallel or orthogonal where a proper pair is required."""


class PreconditionViolated(KsForgeError, ValueError):
    pass


class GadgetRealizationFailed(KsForgeError):
    pass


class DuplicateId(KsForgeError, ValueError):
    pass


class UnknownId(KsForgeError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ContradictoryPremises(KsForgeError, ValueError):
    pass


class SearchBudgetExceeded(KsForgeError):
    pass


class IterationBudgetExceeded(KsForgeError):
    pass

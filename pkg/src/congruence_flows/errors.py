"""Exception hierarchy shared by all modules."""


class CongruenceFlowError(Exception):
    """Base class for every error raised by this package."""


class ChartError(CongruenceFlowError, ValueError):
    """Input needs the south-pole direction, which the single chart excludes."""


class DegenerateParameterization(CongruenceFlowError):
    pass


class DegenerateJacobian(CongruenceFlowError):
    pass


class FocalSingularity(CongruenceFlowError):
    pass


class SourceSingularity(CongruenceFlowError):
    pass


class SingularityTooClose(CongruenceFlowError):
    pass


class CaseMismatch(CongruenceFlowError):
    pass


class IllConditioned(CongruenceFlowError):
    pass


class LocateError(CongruenceFlowError):
    """No congruence line through the requested point could be found."""


class SpecError(CongruenceFlowError, ValueError):
    """A spec document failed to parse or validate."""

"""Exception hierarchy shared by all jointdp modules."""


class MechanismError(ValueError):
    """Base class for invalid inputs to jointdp operations."""


class TooFewDatasets(MechanismError):
    pass


class DuplicateLabel(MechanismError):
    pass


class SelfLoop(MechanismError):
    pass


class DisconnectedGraph(MechanismError):
    pass


class NotStochastic(MechanismError):
    """A row or probability vector is outside [0, 1] or does not sum to 1."""


class IndexOutOfRange(MechanismError, IndexError):
    pass


class AlphabetMismatch(MechanismError):
    pass


class SizeLimitExceeded(MechanismError):
    pass


class DomainError(MechanismError):
    pass


class BadAlpha(DomainError):
    pass


class BadStep(DomainError):
    pass


class MissingEdge(MechanismError):
    pass


class NotInR(MechanismError):
    """The distribution pair violates the argmax ordering required by star reduction."""


class ParseError(MechanismError):
    """A mechanism file is malformed or carries unknown fields."""


class Infeasible(MechanismError):
    pass


class Unbounded(MechanismError):
    pass

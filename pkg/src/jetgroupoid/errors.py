"""Exception types. Domain errors carry a message naming the violated precondition."""


class DomainError(ValueError):
    """An operation's mathematical precondition does not hold."""


class NonComposable(DomainError):
    pass


class NotInvertible(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class NonNormal(DomainError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InvalidSubgroupoid(DomainError):
    pass


class BlowUp(DomainError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SingularDrift(DomainError):
    pass


class MalformedInput(ValueError):
    """Input does not parse against the expected schema."""

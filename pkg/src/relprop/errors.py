"""Exception hierarchy shared by every relprop module."""


class RelpropError(Exception):
    """Base class for all errors raised by relprop."""


class InvalidNumeric(RelpropError):
    pass


class InvalidParameter(RelpropError):
    pass


class InvalidWeights(RelpropError):
    pass


class EmptyInput(RelpropError):
    pass


class EmptyDimensions(RelpropError):
    pass


class UnknownAgent(RelpropError):
    pass


class CycleDetected(RelpropError):
    """Raised when a hop would re-traverse an edge already in the chain.

    This is a suppression signal rather than a failure: callers drop the
    propagation step and carry on.
    """

    def __init__(self, edge):
        self.edge = edge
        source, destination, direction = edge
        super().__init__(f"edge {source}->{destination} ({direction}) already traversed")


class InconsistentChain(RelpropError):
    pass


class NotComparable(RelpropError):
    pass


class NotEnoughMessages(RelpropError):
    pass


class NotAStatement(RelpropError):
    pass


class UnknownStatement(RelpropError):
    pass


class UnknownEntity(RelpropError):
    def __init__(self, token):
        self.token = token
        super().__init__(f"unknown entity {token!r}")


class DuplicateEntity(RelpropError):
    def __init__(self, token):
        self.token = token
        super().__init__(f"entity {token!r} already declared")


class ParseError(RelpropError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ExpectFailed(RelpropError):
    def __init__(self, step, entity, expected, actual):
        self.step = step
        self.entity = entity
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"expectation at line {step} failed for {entity}: "
            f"expected {expected}, actual {actual:.9f}"
        )

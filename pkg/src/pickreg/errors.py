"""Exception hierarchy shared by all pickreg modules."""


class PickregError(Exception):
    """Base class for every error raised by pickreg."""


class InvalidParameter(PickregError, ValueError):
    pass


class DimensionError(PickregError, ValueError):
    """Requested section needs more nodes, targets or moments than supplied."""


class EscalationExhausted(PickregError):
    """Certification failed even at the maximum allowed precision."""

    def __init__(self, message, bits=None, detail=None):
        super().__init__(message)
        self.bits = bits
        self.detail = detail


class IndeterminateComparison(PickregError):
    """Two enclosures overlap so an ordering cannot be certified.

    Box-membership failures attach the box masses with the undecided atoms
    counted in (``inclusive``) and left out (``exclusive``).
    """

    def __init__(self, message, inclusive=None, exclusive=None):
        super().__init__(message)
        self.inclusive = inclusive
        self.exclusive = exclusive


class InvariantViolation(PickregError):
    """A certified check contradicted an identity that must hold."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant

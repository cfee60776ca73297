class PadicError(Exception):
    pass


class PrimeMismatch(PadicError, ValueError):
    pass


class PrecisionExhausted(PadicError):
    """Not enough known digits to produce the requested result."""


class NotAUnit(PadicError, ZeroDivisionError):
    pass


class HenselConditionFailed(PadicError, ValueError):
    pass


class Undecidable(PadicError):
    """A verdict hinges on a coefficient that is zero to its known precision."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ScalingAssumptionViolated(PadicError):
    pass


class PreconditionFailed(PadicError):
    pass


class ParseError(PadicError, ValueError):
    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token

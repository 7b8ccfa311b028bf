"""Exception hierarchy shared by every cklab module."""


class CklabError(ValueError):
    """Base class for all library errors."""


class NonpositiveState(CklabError):
    pass


class UnsupportedLambda(CklabError):
    pass


class NonpositiveFactor(CklabError):
    pass


class DivisionByZeroAlpha(CklabError):
    pass


class UnsupportedGroup(CklabError):
    pass


class DegenerateParameter(CklabError):
    pass


class NoUnstableDirection(CklabError):
    pass


class SeedLeavesPositiveOrthant(CklabError):
    pass


class InvalidOptions(CklabError):
    pass


class NonmonotoneChart(CklabError):
    pass


class ChartMismatch(CklabError):
    pass


class OutOfRange(CklabError):
    pass


class RecursionObstruction(CklabError):
    """A power-series matching equation has no solution at ``order``."""

    def __init__(self, order: int, message: str = ""):
        self.order = order
        super().__init__(f"series recursion obstructed at order {order}" + (f": {message}" if message else ""))


class InsufficientOrder(CklabError):
    pass


class InsufficientSamples(CklabError):
    pass


class UnresolvedEndpoint(CklabError):
    pass


class NotCase3(CklabError):
    pass


class ConfigError(CklabError):
    pass

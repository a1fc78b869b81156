"""Exception hierarchy shared by all chiplace modules."""


class ChiplaceError(Exception):
    """Base class for every error raised by chiplace."""


class InvalidSpec(ChiplaceError, ValueError):
    """A chiplet or architecture definition violates its invariants."""


class Unconnected(ChiplaceError):
    """A placement whose inferred topology leaves some chiplets unreachable."""


class UnreachablePair(ChiplaceError):
    """A traffic pair has no route in the topology."""


class NoValidMove(ChiplaceError):
    """No legal swap or rotation exists for the placement."""


class RetryExhausted(ChiplaceError):
    """An operation kept producing unconnected placements."""


class GenerationExhausted(RetryExhausted):
    pass


class MutationExhausted(RetryExhausted):
    pass


class MergeExhausted(RetryExhausted):
    pass


class BaselineInfeasible(ChiplaceError):
    pass


class NonPositiveTemperature(ChiplaceError, ValueError):
    pass


class DegeneratePopulation(ChiplaceError, ValueError):
    pass


class ConfigError(ChiplaceError):
    """Configuration rejected; ``errors`` holds (json_pointer, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"{ptr or '/'}: {msg}" for ptr, msg in self.errors]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))

"""Exception hierarchy shared by the library and the command line."""


class GreedyLabError(Exception):
    """Base class for every error raised by greedylab."""

    kind = "error"


class InputError(GreedyLabError, ValueError):
    kind = "input"


class SizeError(GreedyLabError):
    """A search space exceeds one of the enumeration caps."""

    kind = "size"


class ContractError(GreedyLabError):
    """An operation was called with arguments violating its precondition."""

    kind = "contract"


class DegenerateNormError(GreedyLabError):
    """A defining ratio had a zero denominator with a nonzero numerator."""

    kind = "degenerate"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DependencyError(GreedyLabError):
    kind = "dependency"

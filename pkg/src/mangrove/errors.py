"""Exception types shared across the package."""


class MangroveError(Exception):
    """Base class for all library errors."""


# ordinal kernel

class OrdinalSyntaxError(MangroveError, ValueError):
    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class NonCanonical(OrdinalSyntaxError):
    pass


class Underflow(MangroveError, ArithmeticError):
    pass


class ZeroArgument(MangroveError, ValueError):
    pass


class UnsupportedOrdinal(MangroveError, ArithmeticError):
    pass


class OutOfDomain(MangroveError, ValueError):
    pass


class DomainMismatch(MangroveError, ValueError):
    pass


# conditions

class ConditionError(MangroveError, ValueError):
    """A constructor precondition failed."""


class TooWide(ConditionError):
    pass


class NotLimit(ConditionError):
    pass


class ZeroAlpha(ConditionError):
    pass


class NotAligned(ConditionError):
    pass


class NotEquivalent(ConditionError):
    pass


class Overlap(ConditionError):
    pass


class AboveLambda(ConditionError):
    pass


class NotInCondition(ConditionError):
    pass


class NotRelated(ConditionError):
    pass


class TermFormatError(MangroveError, ValueError):
    pass


# order, homogeneity, coding, simulation

class Undecided(MangroveError):
    pass


class NotMatchable(MangroveError):
    pass


class BudgetExceeded(MangroveError):
    pass


class OutOfRange(MangroveError, ValueError):
    pass


class InconsistentCode(MangroveError):
    def __init__(self, message, positions=()):
        super().__init__(message)
        self.positions = tuple(positions)


class NotCovered(MangroveError):
    pass


class PullbackMismatch(ConditionError):
    pass


class RecursionDepth(MangroveError):
    pass

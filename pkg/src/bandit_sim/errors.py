"""Exception hierarchy shared by every module of the package."""


class BanditError(Exception):
    """Base class for all errors raised by bandit_sim."""


class InvalidInstanceError(BanditError, ValueError):
    """A bandit instance cannot be built from the given arguments."""


class InvalidParameterError(BanditError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class MissingArmError(BanditError, KeyError):
    """An arm id was requested that the source (or the memory) does not hold."""


class InconsistentInstanceError(BanditError, ValueError):
    """A pulled arm reports a mean above the optimal mean of its instance."""


class EmptyMemoryError(BanditError, ValueError):
    """An operation needs at least one arm in memory."""


class MemoryCapacityError(BanditError, RuntimeError):
    """The arm memory would hold more statistics than its capacity allows."""


class UnsupportedCapacityError(BanditError, ValueError):
    """The memory size is too small for the requested algorithm."""


class ScheduleExhaustedError(BanditError, IndexError):
    """A sub-phase window was requested past the last arm of the phase."""


class PreconditionError(BanditError, ValueError):
    """A closed-form quantity was evaluated outside its domain."""


class UsageError(BanditError, ValueError):
    """An experiment description names an unknown tag or preset."""

"""
Exceptions raised by slicemux

Errors derived from UserDataError are caused by bad input or configuration
and map to exit status 2 on the command line.  Errors derived from
InvariantError indicate an internal inconsistency and map to exit status 3.
"""


class UserDataError(Exception):
    """ bad input data or configuration """
    pass


class InputFileError(UserDataError):
    """
    malformed line in input file

    Wrapped exceptions are rendered with their type name, so that the message
    tells what went wrong with the row.
    """
    def __init__(self, *args):
        args = [f'{type(i).__name__}: {i}' if isinstance(i, Exception) else i
                for i in args]
        super().__init__(*args)


class InvariantError(RuntimeError):
    """ internal invariant breached """
    pass


class PreconditionViolated(InvariantError):
    pass


# markov chains
class NotStochastic(UserDataError):
    pass


class Reducible(UserDataError):
    pass


class Periodic(UserDataError):
    pass


class UnknownState(UserDataError):
    pass


class InvalidParams(UserDataError):
    pass


# trace processing
class UnsortedInput(UserDataError):
    pass


class NoSamples(UserDataError):
    pass


class McsOutOfTable(UserDataError):
    pass


# trial phase
class LengthMismatch(UserDataError):
    pass


class TrialTooShort(UserDataError):
    pass


# detector
class InvalidProbability(UserDataError):
    pass


class WindowTooShort(UserDataError):
    pass


class WindowNotFull(UserDataError):
    pass


# anomaly generation
class AllStatesRemoved(UserDataError):
    pass


class DisconnectedRemainder(UserDataError):
    pass


class NoEntryPoint(UserDataError):
    pass


class BadEntryState(UserDataError):
    pass


# harness
class MissingModel(UserDataError):
    pass

"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``InputError`` (bad files, bad arguments, invalid records) and
``NumericalError`` (the data does not support the requested estimate).
"""


class SynchrocalError(Exception):
    pass


class InputError(SynchrocalError):
    pass


class NumericalError(SynchrocalError):
    pass


class DimensionMismatch(InputError):
    pass


class ParseError(InputError):
    pass


class DuplicateId(InputError):
    pass


class MissingReference(InputError):
    pass


class EmptyInput(InputError):
    pass


class TooFewSnapshots(InputError):
    pass


class TooShort(InputError):
    pass


class ZeroReference(InputError):
    pass


class NoCandidates(InputError):
    pass


class ResultNegativeMagnitude(NumericalError):
    pass


class RankDeficient(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NoConvergence(NumericalError):
    pass


class DegenerateCoefficients(NumericalError):
    def __init__(self, message, denominator=None):
        super().__init__(message)
        self.denominator = denominator


class TooManyFailedResamples(NumericalError):
    pass


class SingularCircuit(NumericalError):
    pass


class UnstableRecursion(NumericalError):
    pass

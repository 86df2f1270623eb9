"""Exceptions raised on contract violations.

Everything user-facing derives from :class:`IkdmmtError` so the command line
can map it to exit code 1.
"""


class IkdmmtError(Exception):
    pass


class ContractError(IkdmmtError):
    """A precondition of an operation does not hold."""


class DimensionError(ContractError, ValueError):
    pass


class VocabularyIndexError(ContractError, IndexError):
    pass


class AlignmentError(ContractError):
    pass


class FormatError(ContractError):
    pass


class ConfigurationError(ContractError):
    pass


class DivergenceError(ContractError):
    pass

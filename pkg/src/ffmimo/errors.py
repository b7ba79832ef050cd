"""Exception types shared across the package."""


class FfmimoError(Exception):
    """Base class for all package errors."""


class RankDeficientError(FfmimoError, ValueError):
    """A matrix over Z_p does not have the rank an operation needs.

    Attributes
    ----------
    rank : int
        The rank that was actually computed.
    required : int
        The rank the operation needed.
    """

    def __init__(self, rank: int, required: int, msg: str | None = None):
        self.rank = rank
        self.required = required
        super().__init__(msg or f"matrix has rank {rank}, need {required}")


class InfeasibleSelectionError(RankDeficientError):
    """No row subset of the requested size is linearly independent."""


class UnfixableChannelError(FfmimoError, ValueError):
    """The integer coefficient search could not reach a full-rank system matrix."""


class CapabilityError(FfmimoError, RuntimeError):
    """An exhaustive computation would exceed its declared size cap."""


class ParseError(FfmimoError, ValueError):
    """Malformed input file; carries 1-based line and column."""

    def __init__(self, msg: str, line: int, col: int = 1, source: str = "<input>"):
        self.line = line
        self.col = col
        self.source = source
        super().__init__(f"{source}:{line}:{col}: {msg}")

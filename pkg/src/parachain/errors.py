"""Exception hierarchy.

Two families matter to the CLI: :class:`InputError` (bad files, bad
configuration, bad flags; exit code 1) and :class:`NumericError`
(estimation or linear-algebra failures on otherwise valid input;
exit code 2).
"""


class ParachainError(Exception):
    """Base class for all package errors."""


class InputError(ParachainError):
    """Malformed user input: files, configuration, or flag combinations."""


class UsageError(InputError):
    """Bad command-line usage."""


class ConfigError(InputError):
    """Invalid or inconsistent experiment configuration."""


class ParseError(InputError):
    """Malformed chain CSV; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnequalChainLengths(InputError):
    """Chains in one set differ in length (and truncation was not requested)."""


class NumericError(ParachainError):
    """Estimation or linear-algebra failure on structurally valid input."""


class NotPositiveDefinite(NumericError):
    """A matrix required to be positive definite is not.

    Typically signals an indefinite lugsail covariance estimate reaching
    a determinant or inverse.
    """


class DegenerateInput(NumericError):
    """Input too degenerate to carry information (constant chain, n < 2, ...)."""


class DomainError(NumericError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class TooFewBatches(NumericError):
    """Batch size leaves fewer than two batches."""


class TooFewChains(NumericError):
    """Operation requires more parallel chains than were supplied."""


class BadLugsailParams(NumericError, ValueError):
    """Lugsail parameters outside r >= 1, 0 <= c < 1, or a mismatched pair."""

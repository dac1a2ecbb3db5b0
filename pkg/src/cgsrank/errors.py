"""Exception types shared across the package.

The CLI maps these onto its exit codes: usage problems exit 2 (argparse or
ValueError at the flag level), data problems exit 3 (ParseError,
FingerprintMismatchError, WeightFormatError), numeric failures exit 4
(NumericError).
"""


class CgsError(Exception):
    """Base class for package-specific errors."""


class ParseError(CgsError):
    """Malformed input data (edge lists, CSV files).

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FingerprintMismatchError(CgsError):
    """Inputs that must describe the same graph do not."""


class WeightFormatError(CgsError):
    """Weight file is truncated, malformed, or from an unknown format version."""


class NumericError(CgsError):
    """A numeric invariant broke at runtime (non-finite loss, divergence)."""

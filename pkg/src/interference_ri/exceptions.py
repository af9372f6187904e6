"""Exception types raised across the package.

The CLI maps these onto exit codes, so keep the hierarchy flat.
"""

from __future__ import annotations


class InvalidArgument(ValueError):
    """A caller supplied an argument outside the operation's domain."""


class InvalidParameter(InvalidArgument):
    """A causal-model parameter lies outside the model's domain (e.g. beta <= 0)."""


class ParseError(ValueError):
    """An input file could not be parsed.

    ``line`` is the 1-based line number of the offending line, or ``None``
    when the problem is not tied to a single line.
    """

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class MethodConstraintError(RuntimeError):
    """The requested inference method cannot be applied to this problem."""


class SpaceTooLarge(MethodConstraintError):
    """Exact enumeration was requested for an assignment space above the cap."""

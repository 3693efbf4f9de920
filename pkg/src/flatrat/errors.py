"""Shared exception types."""


class FlatRatError(Exception):
    """Base class for all library errors."""


class SingularMatrixError(FlatRatError):
    """An operation required an invertible matrix."""


class ZeroMatrixError(FlatRatError):
    """An operation required a nonzero matrix."""


class NotInGL2ZError(FlatRatError):
    """A matrix was expected to be integral with determinant +-1."""


class NotInSubgroupError(FlatRatError):
    """An automaton accepted an element outside the claimed subgroup."""


class NotAnExtensionError(FlatRatError):
    """All generators already lie in GL(2,Z); no proper extension to classify."""


class ResourceLimitError(FlatRatError):
    """A configured state/node/size budget was exceeded."""


class UnsupportedInputError(FlatRatError):
    """Input is outside the decidable fragment this engine implements."""


class ParseError(FlatRatError):
    """Syntax error in the expression grammar, with a position."""

    def __init__(self, message, line=1, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

"""Exception hierarchy shared by every module."""


class PPAError(Exception):
    """Base class."""


class UsageError(PPAError):
    """Bad arguments: arity mismatch, malformed input, missing box entries."""


class ParseError(UsageError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class SortError(ParseError):
    """A parameter was quantified or two group variables were multiplied."""


class ResourceLimit(PPAError):
    """A configured budget was exceeded. Never a wrong answer."""

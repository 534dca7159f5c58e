"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Optional


class SubstructError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SubstructError):
    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class DuplicateDefinition(ParseError):
    pass


class UnknownTypeName(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class SignatureError(ParseError):
    """A type definition is not contractive, not purely positive, or not closed."""

    def __init__(self, code: str, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.code = code
        super().__init__(f"[{code}] {message}", line, col)


class IllFormedType(ParseError):
    """A declared type mentions an unbound type variable."""


class EvalError(SubstructError):
    pass


class OutOfFuel(EvalError):
    pass


class Stuck(EvalError):
    pass


class UnsupportedType(SubstructError):
    pass


class ProbeFailure(SubstructError):
    pass


class CoverageMismatch(SubstructError):
    pass


class MalformedTree(SubstructError):
    pass


class TemplateMismatch(SubstructError):
    """A declaration's type does not match the type a theorem is about."""

from __future__ import annotations

from .ast import Span


class BlockSyntaxError(SyntaxError):
    """Parse failure at a specific span, with the token set that was expected."""

    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.span = span
        self.expected = expected

    def __str__(self) -> str:
        loc = f"line {self.span.line}, col {self.span.col}"
        base = f"{self.args[0]} at {loc}"
        if self.expected:
            base += f" (expected {', '.join(self.expected)})"
        return base


class LimitExceeded(ValueError):
    """Source size or block nesting depth over the hard limit."""


class SchemaError(ValueError):
    """JSON document does not match the program schema."""

    def __init__(self, message: str, pointer: str):
        super().__init__(f"{message} at {pointer or '/'}")
        self.pointer = pointer

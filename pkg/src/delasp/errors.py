"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SourceSpan:
    file: Optional[str]
    line: int
    column: int

    def __str__(self) -> str:
        name = self.file or "<input>"
        return f"{name}:{self.line}:{self.column}"


class DelAspError(Exception):
    """Base class for library errors."""


class ParseError(DelAspError, ValueError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


class LayerError(DelAspError, ValueError):
    """A formula node was used in the wrong layer (ASP vs DEL)."""


class CapExceeded(DelAspError, RuntimeError):
    pass


class UnboundObject(DelAspError, LookupError):
    pass


class NonClassicalInitialState(DelAspError):
    """The initial theory of a planning task does not fix a two-valued model."""

"""Parser error type."""

from __future__ import annotations


class ParseError(ValueError):
    """Source text could not be parsed; carries the first error position
    as a byte offset."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at byte {position})")
        self.position = position

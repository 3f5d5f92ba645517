"""Exception types shared across the toolkit.

The CLI maps these onto its exit-code contract: empty/degenerate input
exits 1, validation and usage problems exit 2.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ToolkitError):
    """Malformed input file; message carries file/line/field diagnostics."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(f"{where}{message}")


class IntegrityError(ToolkitError):
    """Cross-reference violation, e.g. an annotation pointing at an unknown image."""


class RangeError(ToolkitError):
    """A numeric field is outside its allowed range."""


class OutOfImageError(ToolkitError):
    """A box has no area left inside the image after clamping."""


class InsufficientImagesError(ToolkitError):
    """A split request asks for more images than are available."""


class EmptyInputError(ToolkitError):
    """An operation that needs at least one record received none."""

"""
Exception types shared by the PICG toolkit.

Library code raises these; only the command-line layer turns them into exit codes.
"""

from dataclasses import dataclass
from typing import List


class PicgError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class NoLeftElement(PicgError):
    """The selection kernel has nothing to select in the current graph."""


class NotApplicable(PicgError):
    """A rule was applied to a graph where its left element cannot be found."""


class Stuck(PicgError):
    """No rule of the model is applicable to the current graph."""


class UnknownBasis(PicgError):
    """A basis graph name that is not B1, B2 or PA(m)."""


class BadBlockSize(PicgError):
    """PA collapse requested with a step count that is not a multiple of m_pa."""


class BadParams(PicgError):
    """Model or predictor parameters outside their admissible range."""


class NotNormalized(PicgError):
    """A distribution handed to a comparison does not sum to one."""


class InvariantViolation(PicgError):
    """A structural monitor or a trace reconciliation failed during a run."""


class ExportError(PicgError):
    """A data file could not be read back."""


@dataclass(frozen=True)
class Diagnostic:
    """A message tied to a position in a model source (1-based line and column)."""
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ModelError(PicgError):
    """A model source was rejected; carries every diagnostic found."""

    def __init__(self, diagnostics: List[Diagnostic], source_name: str = "<model>"):
        self.diagnostics = list(diagnostics)
        self.source_name = source_name
        super().__init__("\n".join(f"{source_name}:{d}" for d in self.diagnostics))


class ParseError(ModelError):
    """Syntax error in a model source."""


class ValidationError(ModelError):
    """A syntactically valid model source that violates a semantic rule."""

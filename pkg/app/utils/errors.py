"""
Exception hierarchy for the verification workbench.

Domain failures raised inside a check are turned into report records by the
scenario runner; only schema and internal errors reach the CLI exit codes.
"""
from typing import Iterable, Optional


class WorkbenchError(Exception):
    """Base class for all workbench errors."""

    def __init__(self, message: str = "", witness: Optional[str] = None):
        super().__init__(message)
        self.witness = witness


class DivisionByZero(WorkbenchError):
    """A denominator evaluated to zero at the sampled point."""
    pass


class NotPolynomialError(WorkbenchError):
    """A rational expression was handed to a polynomial-only routine."""
    pass


class LegIndexError(WorkbenchError, IndexError):
    """Leg index outside 1..k."""
    pass


class UnknownFamilyError(WorkbenchError):
    pass


class MalformedQListError(WorkbenchError):
    pass


class UnsupportedSystemError(WorkbenchError):
    pass


class NonScalingBracket(WorkbenchError):
    """{m, g} / (m g) is not a constant for some generator g."""

    def __init__(self, generator: str):
        super().__init__(f"bracket with {generator} is not log-scaling", witness=generator)
        self.generator = generator


class SingularGram(WorkbenchError):
    """The constraint Gram matrix is degenerate on the surface."""
    pass


class SingularSystem(WorkbenchError):
    """The F[B] system matrix is singular; witness names the vanishing minor."""
    pass


class InvalidPartition(WorkbenchError):
    pass


class NonInvertibleExchange(WorkbenchError):
    pass


class DegreeCapExceeded(WorkbenchError):
    pass


class NonConfluent(WorkbenchError):
    """Two rewriting paths of one word end in different normal forms."""

    def __init__(self, word: Iterable[str], forms: tuple):
        word = tuple(word)
        super().__init__(f"word {'*'.join(word)} has distinct normal forms",
                         witness='*'.join(word))
        self.word = word
        self.forms = forms


class InconclusiveSampling(WorkbenchError):
    """Resampling limit reached without a usable point."""
    pass

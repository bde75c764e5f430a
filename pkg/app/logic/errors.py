"""Exception hierarchy shared by every workbench module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets into a named input; start <= end."""

    file: str
    start: int
    end: int

    def __str__(self):
        return f"{self.file}:{self.start}-{self.end}"


class WorkbenchError(Exception):
    """Base class for all errors raised by the workbench."""


class ParseError(WorkbenchError):
    """Raised when text does not match the grammar."""

    def __init__(self, span, expected, found, message=None):
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(
            message or f"{span}: expected {expected}, found {found}"
        )


class DanglingReference(ParseError):
    """Raised when a proof script cites a step that does not exist (yet)."""

    def __init__(self, span, step, cited):
        self.step = step
        self.cited = cited
        super().__init__(
            span,
            f"a step before {step}",
            f"reference to step {cited}",
            message=f"{span}: step {step} cites step {cited}, which is not an earlier step",
        )


class ArityMismatch(WorkbenchError):
    """Raised when a predicate symbol is used with the wrong number of arguments."""


class CaptureError(WorkbenchError):
    """Raised when a substituted variable would become bound."""


class OpenAtomError(WorkbenchError):
    """Raised when an atomic system or query mentions an open atom."""


class TransformError(WorkbenchError):
    """Raised when a proof transformation is blocked by a side condition."""


class FreshnessError(WorkbenchError):
    """Raised when an eigen renaming would clash with the hypotheses."""


class FragmentError(WorkbenchError):
    """Raised when a formula falls outside the flattening fragment."""


class UnknownRule(WorkbenchError):
    """Raised when a trace applies a rule that no simulation row produced."""


class InadmissibleBase(WorkbenchError):
    """Raised when a base is outside the universe or violates the basis policy."""


class UnknownDemo(WorkbenchError):
    """Raised for an unrecognised demo name."""


class InvariantViolation(WorkbenchError):
    """Raised when an engine produces an object its own checker rejects."""


class UsageError(WorkbenchError):
    """Raised when command-line options do not fit the input they are applied to."""

"""Exception hierarchy.

Every data-level failure derives from :class:`PDDError`; the CLI maps those
to exit code 2. :class:`InvariantViolation` marks an internal consistency
failure (exit code 3).
"""


class PDDError(ValueError):
    """Base class for data and input errors."""


class SchemaParseError(PDDError):
    pass


class DuplicateAttribute(PDDError):
    pass


class UnknownKind(PDDError):
    pass


class HeaderMismatch(PDDError):
    pass


class InvalidValue(PDDError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyFile(PDDError):
    pass


class TooFewDistinct(PDDError):
    pass


class UnmappedLevel(PDDError):
    pass


class MissingBinSpec(PDDError):
    pass


class EmptyDataset(PDDError):
    pass


class ZeroSupportCondition(PDDError):
    pass


class NumericInput(PDDError):
    pass


class UnknownTarget(PDDError):
    pass


class UnknownAv(PDDError):
    pass


class InconsistentInputs(PDDError):
    pass


class BadKnowledgeBase(PDDError):
    pass


class InvalidSpec(PDDError):
    pass


class InvariantViolation(AssertionError):
    """Internal consistency check failed; indicates a bug, not bad input."""

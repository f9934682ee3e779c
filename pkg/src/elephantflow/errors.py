"""Exception types shared across the pipeline."""


class ElephantFlowError(Exception):
    """Base class for every error raised by this package."""


class InvalidFlow(ElephantFlowError):
    """A flow record violates a field invariant."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"invalid flow field {field!r}: {reason}")
        self.field = field
        self.reason = reason


class FileError(ElephantFlowError):
    """A data file could not be opened or read."""


class MappingError(ElephantFlowError):
    """A column mapping references a column absent from the source file."""

    def __init__(self, column: str, message: str | None = None):
        super().__init__(message or f"mapped column {column!r} not found in source")
        self.column = column


class RowError(ElephantFlowError):
    """A data row could not be converted into a valid flow record."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"row at line {line}: {reason}")
        self.line = line
        self.reason = reason


class SampleTooLarge(ElephantFlowError):
    """Requested sample size exceeds the dataset size."""


class SpecError(ElephantFlowError):
    """A synthetic-domain spec has invalid distribution parameters."""


class EmptyInput(ElephantFlowError):
    """An operation requiring at least one value received none."""


class EmptyIntersection(ElephantFlowError):
    """Feature schemas share no common names."""


class SchemaMismatch(ElephantFlowError):
    """A matrix does not match the schema an artifact was built with."""


class InsufficientMinority(ElephantFlowError):
    """Oversampling needs at least two minority-class samples."""


class TooFewSamples(ElephantFlowError):
    """A class has fewer samples than the number of folds."""

    def __init__(self, label, count: int, k: int):
        super().__init__(f"class {label} has {count} samples, fewer than k={k}")
        self.label = label


class SingleClass(ElephantFlowError):
    """An operation requiring both classes saw only one."""


class LengthMismatch(ElephantFlowError):
    """Two aligned sequences have different lengths."""

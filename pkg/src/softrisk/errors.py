"""Exception hierarchy.

Everything a caller can fix (bad input, mismatched config, missing labels)
derives from :class:`ValidationError`. :class:`InvariantViolation` signals a
bug or a corrupted artifact and is kept separate so the CLI can map it to a
different exit code.
"""
from __future__ import annotations


class SoftRiskError(Exception):
    """Base class for all package errors."""


class ValidationError(SoftRiskError):
    pass


class InvalidInputError(ValidationError, ValueError):
    pass


class ConfigurationError(ValidationError):
    pass


class InvalidGridError(ValidationError, ValueError):
    pass


class IncompatibleUniverseError(ValidationError):
    pass


class EnumerationError(ValidationError):
    pass


class MissingLabelError(ValidationError):
    def __init__(self, patient: str, rule_id: int):
        super().__init__(f"patient {patient!r} in rule {rule_id} has no label")
        self.patient = patient
        self.rule_id = rule_id


class DatasetParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.column = column


class DuplicateIdError(ValidationError):
    pass


class ArtifactError(ValidationError):
    """A persisted artifact is unreadable or belongs to a different run."""


class StageError(SoftRiskError):
    """Wraps an error raised inside a pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class InvariantViolation(SoftRiskError):
    pass

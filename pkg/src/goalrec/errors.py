"""Exception types raised across the package.

Every error condition named in a public contract maps to one class here so
callers can catch precisely what they care about. All classes derive from
``GoalRecError``; most double as ``ValueError`` so generic callers still see
the conventional type.
"""


class GoalRecError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(GoalRecError, ValueError):
    """Tensor dimensions are inconsistent with what an operation requires."""


class EmptyInputError(GoalRecError, ValueError):
    """An operation that needs at least one element received none."""


class InvalidStateError(GoalRecError, RuntimeError):
    """A cached forward pass does not match the parameters it is used with."""


class TrainingDivergedError(GoalRecError, ArithmeticError):
    """A loss or gradient became non-finite during optimisation."""


class DomainError(GoalRecError, ValueError):
    """A planning domain was requested with invalid structure (e.g. 0 blocks)."""


class InapplicableActionError(GoalRecError, ValueError):
    """An action was applied in a state that does not satisfy its preconditions."""


class UnsatisfiableGoalError(GoalRecError, ValueError):
    """A goal is internally inconsistent (cyclic or conflicting placements)."""


class DegenerateGoalError(GoalRecError, ValueError):
    """A goal is already satisfied, so it yields an empty, signal-free plan."""


class OutOfVocabularyError(GoalRecError, ValueError):
    """A label or index is not part of the domain vocabulary."""


class GenerationError(GoalRecError, RuntimeError):
    """Random data synthesis could not produce a valid artefact."""


class InvalidInstanceError(GoalRecError, ValueError):
    """A recognition instance violates its structural invariants."""


class DegenerateNormalizationError(GoalRecError, ValueError):
    """Recognizability cannot be normalised for a single-goal candidate set."""


class DatasetParseError(GoalRecError, ValueError):
    """A dataset file contains a malformed or invalid record."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CheckpointError(GoalRecError, ValueError):
    """A checkpoint file is malformed, truncated, or corrupted."""


class IncompatibilityError(GoalRecError, ValueError):
    """Artifacts cannot be combined (format version or vocabulary mismatch)."""


class InvalidConfigError(GoalRecError, ValueError):
    """A configuration value is out of its permitted range."""

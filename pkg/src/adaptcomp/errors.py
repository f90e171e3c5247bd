"""Exception hierarchy.

Every error raised by the library derives from :class:`AdaptCompError` so the
CLI can map it to a stable name and exit code.
"""


class AdaptCompError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConformanceError(AdaptCompError, ValueError):
    """Array dimensions do not conform to the model."""

    exit_code = 2


class ArityError(AdaptCompError, ValueError):
    """Wrong number of compressor choices for the horizon."""

    exit_code = 2


class SpecializationError(AdaptCompError, ValueError):
    """Model does not match a required special case (e.g. scalar measurements)."""

    exit_code = 2


class InvariantError(AdaptCompError, ValueError):
    """A model invariant (symmetry, definiteness, rank) is violated."""

    exit_code = 2


class DomainError(AdaptCompError, ValueError):
    """Input outside the mathematical domain of an operation."""


class SingularityError(AdaptCompError, ArithmeticError):
    """A matrix that must be inverted is numerically singular."""


class DegenerateStateError(AdaptCompError):
    """No informative measurement direction remains."""


class CaseSelectionError(AdaptCompError):
    """Preconditions of both optimal-factor cases fail."""


class InfeasibleRecoveryError(AdaptCompError):
    """No finite compressor reproduces a requested normalized column."""


class SearchBudgetError(AdaptCompError):
    """Exhaustive search would exceed the evaluation budget."""


class ConfigError(AdaptCompError):
    """Scenario file is malformed or names an invalid configuration."""

    exit_code = 2


class GoldenCheckError(AdaptCompError):
    """A reproduction target did not match its reference values."""

    exit_code = 4

    def __init__(self, name, mismatches):
        self.name = name
        self.mismatches = list(mismatches)
        lines = [f"{name}: {len(self.mismatches)} golden check(s) failed"]
        for label, expected, actual in self.mismatches:
            lines.append(f"  {label}: expected {expected!r}, got {actual!r}")
        super().__init__("\n".join(lines))

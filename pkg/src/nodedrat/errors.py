"""Error types shared by all modules.  Each carries a short machine-readable
``code`` and the CLI exit status it maps to."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "where": self.where}


class NodedRationalError(Exception):
    code = "error"
    exit_code = 2

    def __init__(self, message: str = "", violations=None):
        super().__init__(message or self.code)
        self.violations = list(violations or [])

    def to_json(self) -> dict:
        return {
            "error": self.code,
            "message": str(self),
            "violations": [v.to_json() for v in self.violations],
        }


class ValidationError(NodedRationalError):
    code = "validation"


class IndexFormulaError(ValidationError):
    code = "index-formula"


class CollisionError(ValidationError):
    code = "collision"


class DegenerateIndexError(ValidationError):
    code = "degenerate-index"


class TooFewPointsError(ValidationError):
    code = "too-few-points"


class InvalidTripleError(ValidationError):
    code = "invalid-triple"


class IdentityMapError(ValidationError):
    code = "identity-map"


class NotFixedError(ValidationError):
    code = "not-fixed"


class LevelExceededError(ValidationError):
    code = "level-exceeded"


class SingularInputError(ValidationError):
    code = "singular-input"


class ConventionError(ValidationError):
    code = "convention"


class SchemaError(ValidationError):
    code = "schema"


class InconsistencyError(ValidationError):
    code = "inconsistency"


class InvalidSampleError(ValidationError):
    code = "invalid-sample"


class ScheduleError(ValidationError):
    code = "schedule"


class UnstableError(ValidationError):
    code = "unstable"


class NoLimitError(NodedRationalError):
    code = "no-limit"
    exit_code = 3


class PlanFailure(NodedRationalError):
    code = "plan-failure"
    exit_code = 3


class UnsupportedError(NodedRationalError):
    code = "unsupported"
    exit_code = 4


class BudgetExhausted(NodedRationalError):
    code = "budget"
    exit_code = 5

    def __init__(self, message: str = "", violations=None, partial=None):
        super().__init__(message, violations)
        self.partial = partial

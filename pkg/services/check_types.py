"""Result types for the numerical self-check."""

from dataclasses import dataclass
from enum import Enum


class CheckStatus(str, Enum):
    """Outcome of one identity check."""
    PASS = "pass"
    FAIL = "fail"


@dataclass(frozen=True)
class CheckResult:
    """
    One identity evaluated by the self-check.

    Attributes:
        name: Short description of the identity
        measured_error: Relative (or log-relative) discrepancy found
        tolerance: Largest discrepancy accepted
        status: PASS when measured_error <= tolerance
        detail: Optional note, e.g. the exception text when the check crashed
    """
    name: str
    measured_error: float
    tolerance: float
    status: CheckStatus
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASS

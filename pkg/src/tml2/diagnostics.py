"""Position-tagged diagnostics shared by the parser and validator."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

_CODE_RE = re.compile(r"[PV][0-9]{3}")


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str  # stable identifier, [PV][0-9]{3}
    message: str
    file: str
    line: int
    col: int

    def __post_init__(self) -> None:
        if not _CODE_RE.fullmatch(self.code):
            raise ValueError(f"malformed diagnostic code {self.code!r}")

    def render(self) -> str:
        """The one-line form printed on the diagnostic stream."""
        return (
            f"{self.file}:{self.line}:{self.col}: "
            f"{self.severity}[{self.code}]: {self.message}"
        )

    @property
    def sort_key(self) -> tuple[str, int, int]:
        return (self.file, self.line, self.col)


def error(code: str, message: str, file: str, line: int, col: int) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, file, line, col)


def warning(code: str, message: str, file: str, line: int, col: int) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, file, line, col)

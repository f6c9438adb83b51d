from __future__ import annotations

from dataclasses import dataclass


class KabError(Exception):
    """Base class for all errors raised by kabcheck."""


@dataclass(frozen=True)
class Location:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(KabError):
    def __init__(self, message: str, location: Location, category: str = "syntax"):
        super().__init__(f"{location}: {category} error: {message}")
        self.message = message
        self.location = location
        self.category = category


@dataclass(frozen=True)
class Issue:
    category: str
    message: str
    location: Location

    def __str__(self) -> str:
        return f"{self.location}: {self.category}: {self.message}"


class ValidationError(KabError):
    """Raised with every invariant violation found, not just the first."""

    def __init__(self, issues: list[Issue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))

    @property
    def location(self) -> Location:
        return self.issues[0].location


class InconsistentKB(KabError):
    pass


class InconsistentInitialState(KabError):
    pass


class BudgetExceeded(KabError):
    def __init__(self, message: str, weakly_acyclic: bool | None = None):
        super().__init__(message)
        self.weakly_acyclic = weakly_acyclic


class AlphabetMismatch(KabError):
    pass

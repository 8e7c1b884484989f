from __future__ import annotations

from dataclasses import dataclass

from pathwise.subjectlang.ast import Span


@dataclass(frozen=True, slots=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    span: Span
    code: str
    message: str
    path: str = ""

    def sort_key(self):
        return (self.path, self.span.line, self.span.col, self.code, self.message)

    def __str__(self) -> str:
        where = f"{self.path}:{self.span}" if self.path else str(self.span)
        return f"{where}: {self.severity} {self.code}: {self.message}"


def error(span: Span, code: str, message: str, path: str = "") -> Diagnostic:
    return Diagnostic("error", span, code, message, path)


def sort_diagnostics(diags) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags) -> bool:
    return any(d.severity == "error" for d in diags)

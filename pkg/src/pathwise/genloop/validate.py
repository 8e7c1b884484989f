"""Two-stage validation of a candidate test: compile, then execute."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from pathwise.errors import EngineError, ParseError
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.checker import check
from pathwise.subjectlang.diagnostics import Diagnostic, error
from pathwise.subjectlang.interp import DEFAULT_STEP_BUDGET, ExceptionEvent, ExecutionTrace, Interpreter
from pathwise.subjectlang.parser import parse
from pathwise.subjectlang.project import Project

TEST_CLASS = "Test"
TEST_ENTRY = "Test#test()"
TEST_PATH = "Test.sj"


@dataclass(frozen=True)
class CompileError:
    diagnostics: tuple[Diagnostic, ...]
    kind: str = "compile-error"
    valid: bool = False


@dataclass(frozen=True)
class ExceptionBeforeFocal:
    trace: ExecutionTrace
    kind: str = "exception-before-focal"
    valid: bool = False


@dataclass(frozen=True)
class FocalNotReached:
    """The test ran to completion without ever entering the focal method."""

    trace: ExecutionTrace
    kind: str = "focal-not-reached"
    valid: bool = False


@dataclass(frozen=True)
class Valid:
    trace: ExecutionTrace
    kind: str = "valid"
    valid: bool = True

    @property
    def warning(self) -> Optional[str]:
        """Set when the test raised after entering the focal method (a possible bug signal)."""
        exc = self.trace.exception
        return None if exc is None else f"{exc.kind} at {exc.span} after focal entry: {exc.message}"


@dataclass(frozen=True)
class BackendError:
    message: str
    kind: str = "backend-failure"
    valid: bool = False


def _entry_problems(unit: A.SourceUnit) -> list[Diagnostic]:
    cls = next((c for c in unit.classes if c.name == TEST_CLASS), None)
    if cls is None:
        return [error(A.Span(1, 1), "MISSING_ENTRY", "no class named Test", unit.path)]
    m = cls.method("test")
    if m is None or m.params or not m.is_static or m.access != "public" or m.return_type != "void":
        span = m.span if m is not None else cls.span
        return [error(span, "MISSING_ENTRY", "Test needs a method public static void test()", unit.path)]
    return []


def compile_candidate(candidate: str, project: Project):
    """(project with the test added, diagnostics). Diagnostics are errors only."""
    try:
        unit = parse(candidate, TEST_PATH)
    except ParseError as exc:
        return None, tuple(exc.diagnostics)
    combined = project.with_unit(unit)
    diags = [d for d in check(combined) if d.severity == "error"]
    diags.extend(_entry_problems(unit))
    return combined, tuple(diags)


def validate(candidate: str, project: Project, focal: str,
             step_budget: int = DEFAULT_STEP_BUDGET):
    combined, diags = compile_candidate(candidate, project)
    if diags:
        return CompileError(diags)
    try:
        trace = Interpreter(combined, focal=focal, step_budget=step_budget).run(TEST_ENTRY)
    except EngineError as exc:
        return CompileError((error(A.Span(1, 1), "ENGINE_ERROR", str(exc), TEST_PATH),))
    if trace.focal_reached:
        return Valid(trace)
    if trace.exception is not None:
        return ExceptionBeforeFocal(trace)
    return FocalNotReached(trace)

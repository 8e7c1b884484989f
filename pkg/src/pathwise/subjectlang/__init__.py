"""Subject language: parser, checker, pretty-printer, interpreter and coverage."""

from pathwise.subjectlang.ast import SourceUnit, MethodDecl, ClassDecl, FieldDecl, Span
from pathwise.subjectlang.checker import check
from pathwise.subjectlang.coverage import CoverageReport, measure_coverage
from pathwise.subjectlang.diagnostics import Diagnostic
from pathwise.subjectlang.dispatch import resolve_dispatch
from pathwise.subjectlang.interp import ExecutionTrace, Interpreter, execute
from pathwise.subjectlang.parser import parse
from pathwise.subjectlang.printer import pretty
from pathwise.subjectlang.project import Project

__all__ = [
    "SourceUnit", "MethodDecl", "ClassDecl", "FieldDecl", "Span", "check", "CoverageReport",
    "measure_coverage", "Diagnostic", "resolve_dispatch", "ExecutionTrace", "Interpreter",
    "execute", "parse", "pretty", "Project",
]

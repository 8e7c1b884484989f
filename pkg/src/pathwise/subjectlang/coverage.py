"""Branch and line coverage over execution traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from pathwise.subjectlang import ast as A
from pathwise.subjectlang.interp import BranchEvent, StmtEvent
from pathwise.subjectlang.project import Project


@dataclass
class MethodCoverage:
    branch_points: tuple[A.Span, ...]
    lines: frozenset[int]
    covered_branch_outcomes: set = field(default_factory=set)  # {(span, outcome)}
    covered_lines: set = field(default_factory=set)

    @property
    def total_branch_outcomes(self) -> int:
        return 2 * len(self.branch_points)

    @property
    def total_lines(self) -> int:
        return len(self.lines)

    @property
    def branch_pct(self) -> float:
        return _pct(len(self.covered_branch_outcomes), self.total_branch_outcomes)

    @property
    def line_pct(self) -> float:
        return _pct(len(self.covered_lines), self.total_lines)


def _pct(covered: int, total: int) -> float:
    return 100.0 if total == 0 else 100.0 * covered / total


@dataclass
class CoverageReport:
    methods: dict[str, MethodCoverage]

    @property
    def covered_branches(self) -> int:
        return sum(len(m.covered_branch_outcomes) for m in self.methods.values())

    @property
    def total_branches(self) -> int:
        return sum(m.total_branch_outcomes for m in self.methods.values())

    @property
    def covered_lines(self) -> int:
        return sum(len(m.covered_lines) for m in self.methods.values())

    @property
    def total_lines(self) -> int:
        return sum(m.total_lines for m in self.methods.values())

    @property
    def branch_pct(self) -> float:
        return _pct(self.covered_branches, self.total_branches)

    @property
    def line_pct(self) -> float:
        return _pct(self.covered_lines, self.total_lines)


def branch_points(method: A.MethodDecl) -> tuple[A.Span, ...]:
    """Spans of every atomic condition in the method's ``if``/``while`` guards."""
    if method.body is None:
        return ()
    out = []
    for s in A.statements(method.body):
        if isinstance(s, (A.If, A.While)):
            out.extend(atom.span for atom in A.guard_atoms(s.cond))
    return tuple(out)


def statement_lines(method: A.MethodDecl) -> frozenset[int]:
    if method.body is None:
        return frozenset()
    return frozenset(s.span.line for s in A.statements(method.body))


def measure_coverage(traces: Iterable, project, scope: Optional[Iterable[str]] = None) -> CoverageReport:
    """Union coverage of ``traces`` over the methods in ``scope`` (default: every concrete method)."""
    proj = project if isinstance(project, Project) else Project(project)
    refs = sorted(scope) if scope is not None else sorted(
        ref for ref, m in proj.methods.items() if m.body is not None)
    methods = {}
    for ref in refs:
        m = proj.method(ref)
        if m is None:
            raise KeyError(ref)
        methods[ref] = MethodCoverage(branch_points(m), statement_lines(m))
    for trace in traces:
        for ev in trace.events:
            cov = methods.get(ev.method) if isinstance(ev, (BranchEvent, StmtEvent)) else None
            if cov is None:
                continue
            if isinstance(ev, BranchEvent):
                cov.covered_branch_outcomes.add((ev.span, ev.outcome))
            else:
                cov.covered_lines.add(ev.span.line)
    return CoverageReport(methods)

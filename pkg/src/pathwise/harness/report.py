"""Run reports: per-focal session rows, project totals and coverage."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from pathwise.errors import MalformedInput, VersionMismatch

REPORT_VERSION = 1
STATUSES = ("valid", "exhausted", "infeasible-skipped")


@dataclass
class SessionRow:
    path: int
    status: str
    rounds: int
    outcomes: list[str] = field(default_factory=list)
    test_file: Optional[str] = None
    prompt_file: Optional[str] = None
    reason: str = ""
    warning: Optional[str] = None

    def to_json(self) -> dict:
        return {"path": self.path, "status": self.status, "rounds": self.rounds, "outcomes": self.outcomes,
                "test_file": self.test_file, "prompt_file": self.prompt_file, "reason": self.reason,
                "warning": self.warning}


@dataclass
class FocalRow:
    method: str
    paths_found: int
    paths_truncated: bool = False
    sessions: list[SessionRow] = field(default_factory=list)

    @property
    def breakdown(self) -> dict:
        return {s: sum(1 for r in self.sessions if r.status == s) for s in STATUSES}

    @property
    def generated(self) -> int:
        return sum(1 for r in self.sessions if r.status != "infeasible-skipped")

    @property
    def valid(self) -> int:
        return self.breakdown["valid"]

    @property
    def invalid(self) -> int:
        return self.breakdown["exhausted"]

    def to_json(self) -> dict:
        return {"method": self.method, "paths_found": self.paths_found,
                "paths_truncated": self.paths_truncated, "sessions_run": len(self.sessions),
                "generated": self.generated, "valid": self.valid, "invalid": self.invalid,
                "status": self.breakdown, "sessions": [s.to_json() for s in self.sessions]}


@dataclass
class RunReport:
    project: str
    backend: str
    max_rounds: int
    coverage_scope: str
    focals: list[FocalRow] = field(default_factory=list)
    coverage: dict = field(default_factory=dict)

    @property
    def generated(self) -> int:
        return sum(f.generated for f in self.focals)

    @property
    def valid(self) -> int:
        return sum(f.valid for f in self.focals)

    @property
    def valid_rate(self) -> float:
        """Valid over generated; a run that generated nothing scores 0."""
        return self.valid / self.generated if self.generated else 0.0

    def valid_by_round(self) -> list[int]:
        """Cumulative count of valid sessions after each round index."""
        return [sum(1 for f in self.focals for s in f.sessions if s.status == "valid" and s.rounds <= r)
                for r in range(1, self.max_rounds + 1)]

    def to_json(self) -> dict:
        cov = self.coverage
        return {
            "format_version": REPORT_VERSION,
            "project": self.project,
            "backend": self.backend,
            "max_rounds": self.max_rounds,
            "coverage_scope": self.coverage_scope,
            "focals": [f.to_json() for f in self.focals],
            "totals": {"focals": len(self.focals), "paths": sum(f.paths_found for f in self.focals),
                       "sessions": sum(len(f.sessions) for f in self.focals),
                       "generated": self.generated, "valid": self.valid,
                       "valid_rate": round(self.valid_rate, 6), "valid_by_round": self.valid_by_round(),
                       "branch_pct": cov.get("branch_pct", 100.0), "line_pct": cov.get("line_pct", 100.0)},
            "coverage": cov,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunReport":
        if not isinstance(data, dict):
            raise MalformedInput("report must be a JSON object")
        if data.get("format_version") != REPORT_VERSION:
            raise VersionMismatch(f"report format {data.get('format_version')!r}, expected {REPORT_VERSION}")
        try:
            focals = [FocalRow(f["method"], f["paths_found"], f["paths_truncated"],
                               [SessionRow(**s) for s in f["sessions"]]) for f in data["focals"]]
            return cls(data["project"], data["backend"], data["max_rounds"], data["coverage_scope"],
                       focals, data["coverage"])
        except (KeyError, TypeError) as exc:
            raise MalformedInput(f"bad report: {exc}") from exc


def coverage_json(cov) -> dict:
    """Serializable summary of a :class:`~pathwise.subjectlang.coverage.CoverageReport`."""
    return {
        "branch_pct": round(cov.branch_pct, 4), "line_pct": round(cov.line_pct, 4),
        "covered_branches": cov.covered_branches, "total_branches": cov.total_branches,
        "covered_lines": cov.covered_lines, "total_lines": cov.total_lines,
        "methods": {ref: {"branch_pct": round(m.branch_pct, 4), "line_pct": round(m.line_pct, 4),
                          "covered_branches": sorted([s.line, s.col, o] for s, o in m.covered_branch_outcomes),
                          "total_branches": m.total_branch_outcomes,
                          "covered_lines": sorted(m.covered_lines), "total_lines": m.total_lines}
                    for ref, m in cov.methods.items()},
    }


def render(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), indent=2, sort_keys=False) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [(f.method, f.paths_found, len(f.sessions), f.valid, f.invalid, f.breakdown["infeasible-skipped"])
            for f in report.focals]
    width = max([len("focal")] + [len(r[0]) for r in rows])
    head = ("focal", "paths", "run", "valid", "invalid", "skipped")
    fmt_row = "{:<%d}  {:>5}  {:>4}  {:>5}  {:>7}  {:>7}" % width
    lines = [fmt_row.format(*head)]
    lines += [fmt_row.format(*r) for r in rows]
    totals = ("TOTAL",) + tuple(sum(r[i] for r in rows) for i in range(1, 6))
    lines.append(fmt_row.format(*totals))
    cov = report.coverage
    lines.append(f"valid rate {100 * report.valid_rate:.2f}% ({report.valid}/{report.generated})  "
                 f"branch coverage {cov.get('branch_pct', 100.0):.2f}% "
                 f"({cov.get('covered_branches', 0)}/{cov.get('total_branches', 0)})  "
                 f"line coverage {cov.get('line_pct', 100.0):.2f}% "
                 f"({cov.get('covered_lines', 0)}/{cov.get('total_lines', 0)})")
    return "\n".join(lines) + "\n"

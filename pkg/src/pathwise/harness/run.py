"""End-to-end pipeline: extract, distill, generate, validate, measure."""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from pathwise.distill import distill
from pathwise.errors import NoConcreteReceiver, ParseError, ProjectError
from pathwise.genloop import BruteForceBackend, Domains, ExternalBackend, ScriptedBackend, run_session
from pathwise.genloop.session import INFEASIBLE, RefinementSession
from pathwise.harness.config import RunConfig
from pathwise.harness.report import FocalRow, RunReport, SessionRow, coverage_json, render
from pathwise.harness.select import select_focals
from pathwise.knowledge import build_kb, save_kb
from pathwise.subjectlang import Project, check, measure_coverage, parse

PHASES = ("extract", "distill", "generate", "validate")


def load_project(project_dir) -> Project:
    """Parse and check every ``.sj`` file under ``project_dir``, in sorted path order."""
    root = Path(project_dir)
    if not root.is_dir():
        raise ProjectError(f"{project_dir} is not a directory")
    units, diags = [], []
    for path in sorted(root.rglob("*.sj")):
        rel = path.relative_to(root).as_posix()
        try:
            units.append(parse(path.read_text(encoding="utf-8"), rel))
        except ParseError as exc:
            diags.extend(exc.diagnostics)
    if diags:
        raise ProjectError(f"{len(diags)} syntax error(s) in {project_dir}", diags)
    project = Project(units)
    errors = [d for d in check(project) if d.severity == "error"]
    if errors:
        raise ProjectError(f"{len(errors)} check error(s) in {project_dir}", errors)
    return project


def make_backend(config: RunConfig, project: Project):
    spec = config.backend
    if spec.kind == "scripted":
        return ScriptedBackend.from_file(spec.file)
    if spec.kind == "external":
        return ExternalBackend(spec.command, spec.timeout)
    return BruteForceBackend(project, Domains.for_project(project, **config.domains))


def slug(ref: str) -> str:
    """File-name form of a method reference: ``A#m(int,string)`` becomes ``A.m-int-string``."""
    owner, _, sig = ref.partition("#")
    name, _, rest = sig.partition("(")
    types = [t for t in rest.rstrip(")").split(",") if t]
    return ".".join((owner, name)) + "".join("-" + t for t in types)


class _Timed:
    """Backend wrapper that adds the time spent producing candidates to a shared counter."""

    def __init__(self, backend, clock: dict, lock: threading.Lock):
        self.backend, self.clock, self.lock = backend, clock, lock
        self.capability = backend.capability

    def produce(self, request):
        start = time.perf_counter()
        try:
            return self.backend.produce(request)
        finally:
            with self.lock:
                self.clock["generate"] += time.perf_counter() - start


@dataclass
class RunResult:
    report: RunReport
    timing: dict
    sessions: list[RefinementSession] = field(default_factory=list)
    kb: object = None
    project: Optional[Project] = None


def _session(ref, path, kb, backend, project, config, clock, lock) -> RefinementSession:
    start = time.perf_counter()
    try:
        context = distill(ref, path, kb, config.recursion_depth)
    except NoConcreteReceiver as exc:
        session = RefinementSession(ref, path, None, config.max_rounds, status=INFEASIBLE, reason=str(exc))
        with lock:
            clock["distill"] += time.perf_counter() - start
        return session
    mid = time.perf_counter()
    before = clock["generate"]
    session = run_session(ref, path, kb, backend, project, config.max_rounds, config.recursion_depth,
                          context=context)
    end = time.perf_counter()
    with lock:
        clock["distill"] += mid - start
        # validation is whatever the session spent outside the backend
        clock["validate"] += max(0.0, (end - mid) - (clock["generate"] - before))
    return session


def run(config: RunConfig, project: Optional[Project] = None, backend=None) -> RunResult:
    """Run the whole pipeline. Writes artifacts when ``config.output_dir`` is set.

    ``backend`` overrides the one described by ``config.backend``.
    """
    clock = {p: 0.0 for p in PHASES}
    lock = threading.Lock()
    start = time.perf_counter()
    project = project or load_project(config.project_dir)
    kb = build_kb(project, config.path_cap)
    focals = select_focals(kb, config.focal_filter)
    clock["extract"] = time.perf_counter() - start

    backend = _Timed(backend or make_backend(config, project), clock, lock)
    tasks = [(ref, p) for ref in focals for p in kb.paths_of(ref)]

    def job(task):
        return _session(task[0], task[1], kb, backend, project, config, clock, lock)

    if config.parallelism > 1:
        with ThreadPoolExecutor(config.parallelism) as pool:
            sessions = list(pool.map(job, tasks))
    else:
        sessions = [job(t) for t in tasks]

    out = Path(config.output_dir) if config.output_dir else None
    rows = {ref: FocalRow(ref, len(kb.paths_of(ref)), kb.paths_of(ref).truncated) for ref in focals}
    for s in sessions:
        name = f"{slug(s.focal)}.path{s.path.index}"
        valid = s.rounds[-1].outcome if s.status == "valid" else None
        rows[s.focal].sessions.append(SessionRow(
            s.path.index, s.status, len(s.rounds), [r.outcome.kind for r in s.rounds],
            f"tests/{name}.sj" if valid is not None else None,
            f"prompts/{name}.txt" if s.prompt is not None else None,
            s.reason, valid.warning if valid is not None else None))

    traces = [s.trace for s in sessions if s.status == "valid"]
    scope = focals if config.coverage_scope == "focal" else None
    coverage = measure_coverage(traces, project, scope)
    report = RunReport(config.project_dir, config.backend.kind, config.max_rounds, config.coverage_scope,
                       [rows[r] for r in focals], coverage_json(coverage))
    timing = {p: round(clock[p], 6) for p in PHASES}
    timing["total"] = round(time.perf_counter() - start, 6)
    result = RunResult(report, timing, sessions, kb, project)
    if out is not None:
        write_artifacts(result, out)
    return result


def write_artifacts(result: RunResult, out: Path) -> None:
    try:
        (out / "tests").mkdir(parents=True, exist_ok=True)
        (out / "prompts").mkdir(parents=True, exist_ok=True)
        save_kb(result.kb, out / "kb.json")
        for s in result.sessions:
            name = f"{slug(s.focal)}.path{s.path.index}"
            if s.prompt is not None:
                (out / "prompts" / f"{name}.txt").write_text(s.prompt.render(), encoding="utf-8")
            if s.test_source is not None:
                (out / "tests" / f"{name}.sj").write_text(s.test_source, encoding="utf-8")
        (out / "sessions.json").write_text(
            json.dumps([s.to_json() for s in result.sessions], indent=2) + "\n", encoding="utf-8")
        (out / "report.json").write_text(render(result.report, "json"), encoding="utf-8")
        (out / "timing.json").write_text(json.dumps(result.timing, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ProjectError(f"cannot write to {out}: {exc}") from exc

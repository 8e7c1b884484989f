"""Generator backends and the requests they answer."""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence, Union

from pathwise.errors import BackendFailure, ConfigError, InfeasibleContext
from pathwise.genloop.bruteforce import Domains, Unsat, brute_force_generate
from pathwise.genloop.prompt import PromptDocument
from pathwise.subjectlang.interp import BranchEvent, EnterEvent, ExceptionEvent, StmtEvent

WIRE_VERSION = 1
DEFAULT_TIMEOUT = 120.0
TRACE_EXCERPT = 5


@dataclass(frozen=True)
class Capability:
    name: str
    deterministic: bool


@dataclass(frozen=True)
class GenerateRequest:
    prompt: PromptDocument
    round: int = 1
    context: object = field(default=None, compare=False, repr=False)
    kind: str = "generate"

    def to_wire(self) -> dict:
        return {"kind": self.kind, "prompt": self.prompt.to_json(), "format_version": WIRE_VERSION}


@dataclass(frozen=True)
class RepairRequest:
    """A failed candidate sent back with what went wrong.

    ``stage`` is "syntax" for checker diagnostics and "runtime" for failures
    found by executing the test.
    """

    prompt: PromptDocument
    prior_candidate: str
    stage: str
    failure: dict
    round: int = 2
    context: object = field(default=None, compare=False, repr=False)
    kind: str = "repair"

    def __post_init__(self):
        if self.stage not in ("syntax", "runtime") or not self.failure:
            raise ValueError("a repair request needs a tagged, nonempty failure")

    def to_wire(self) -> dict:
        return {"kind": self.kind, "prompt": self.prompt.to_json(), "prior_candidate": self.prior_candidate,
                "failure": dict(self.failure, stage=self.stage), "format_version": WIRE_VERSION}


Request = Union[GenerateRequest, RepairRequest]


def render_event(ev) -> str:
    if isinstance(ev, EnterEvent):
        return f"enter {ev.method} (activation {ev.activation})"
    if isinstance(ev, BranchEvent):
        return f"branch {ev.method} at {ev.span} -> {'true' if ev.outcome else 'false'}"
    if isinstance(ev, StmtEvent):
        return f"statement {ev.method} at {ev.span}"
    if isinstance(ev, ExceptionEvent):
        return f"exception {ev.kind} in {ev.method} at {ev.span}: {ev.message}"
    return str(ev)


def failure_of(outcome) -> tuple[str, dict]:
    """(stage, failure payload) describing an invalid validation outcome."""
    if outcome.kind == "compile-error":
        return "syntax", {"diagnostics": [
            {"severity": d.severity, "code": d.code, "message": d.message, "path": d.path,
             "span": [d.span.line, d.span.col]} for d in outcome.diagnostics]}
    events = outcome.trace.events
    exc = outcome.trace.exception
    if exc is None:
        tail = [render_event(ev) for ev in events[-TRACE_EXCERPT:]]
        return "runtime", {"exception": None, "message": "the test finished without calling the focal method",
                           "preceding_events": tail}
    at = max(i for i, ev in enumerate(events) if ev is exc)
    tail = [render_event(ev) for ev in events[max(0, at - TRACE_EXCERPT):at]]
    return "runtime", {"exception": {"kind": exc.kind, "message": exc.message, "method": exc.method,
                                     "span": [exc.span.line, exc.span.col]},
                       "preceding_events": tail}


class GeneratorBackend(Protocol):
    capability: Capability

    def produce(self, request: Request) -> str: ...


class ScriptedBackend:
    """Replays a fixed list of responses by round; the last one repeats.

    An exception instance in the script is raised instead of returned, which
    simulates a transport failure.
    """

    capability = Capability("scripted", True)

    def __init__(self, responses: Sequence):
        if not responses:
            raise ConfigError("a scripted backend needs at least one response")
        self.responses = list(responses)

    @classmethod
    def from_file(cls, path) -> "ScriptedBackend":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read script {path}: {exc}") from exc
        responses = data.get("responses") if isinstance(data, dict) else data
        if not isinstance(responses, list) or not all(isinstance(r, str) for r in responses):
            raise ConfigError(f"{path}: expected a list of response strings")
        return cls(responses)

    def produce(self, request: Request) -> str:
        item = self.responses[min(request.round - 1, len(self.responses) - 1)]
        if isinstance(item, BaseException):
            raise item
        return item


class ExternalBackend:
    """Runs a command per request: JSON on standard input, test source on standard output."""

    capability = Capability("external", False)

    def __init__(self, command: Union[str, Sequence[str]], timeout: float = DEFAULT_TIMEOUT):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ConfigError("empty backend command")
        self.timeout = timeout

    def produce(self, request: Request) -> str:
        payload = json.dumps(request.to_wire(), ensure_ascii=False)
        try:
            done = subprocess.run(self.argv, input=payload.encode("utf-8"), capture_output=True,
                                  timeout=self.timeout)
        except subprocess.TimeoutExpired as exc:
            raise BackendFailure(f"backend timed out after {self.timeout} s") from exc
        except OSError as exc:
            raise BackendFailure(f"cannot start backend: {exc}") from exc
        if done.returncode != 0:
            err = done.stderr.decode("utf-8", "replace").strip()
            raise BackendFailure(f"backend exited with status {done.returncode}: {err}")
        try:
            text = done.stdout.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BackendFailure("backend output is not UTF-8") from exc
        if not text.strip():
            raise BackendFailure("backend produced no output")
        return text


class BruteForceBackend:
    """Exhaustive search over small domains; its tests are checked before they are returned.

    Needs the distilled context on the request. A repair request gets the same
    answer again, since the search is deterministic.
    """

    capability = Capability("brute-force", True)

    def __init__(self, project, domains: Optional[Domains] = None, reflective: bool = True):
        self.project = project
        self.domains = domains or Domains.for_project(project)
        self.reflective = reflective
        self._cache: dict = {}

    def produce(self, request: Request) -> str:
        ctx = request.context
        if ctx is None:
            raise BackendFailure("the brute-force backend needs the distilled context")
        key = (ctx.focal, ctx.path.index, ctx.path.node_ids)
        if key not in self._cache:
            self._cache[key] = brute_force_generate(ctx, self.project, self.domains, self.reflective)
        out = self._cache[key]
        if isinstance(out, Unsat):
            raise InfeasibleContext(out.reason)
        return out

"""The bounded generate, validate and repair loop for one (focal method, path) pair."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from pathwise.distill import distill
from pathwise.distill.resolve import DEFAULT_DEPTH
from pathwise.errors import BackendFailure, InfeasibleContext
from pathwise.genloop.backends import GenerateRequest, RepairRequest, failure_of
from pathwise.genloop.prompt import PromptDocument, build_prompt
from pathwise.genloop.validate import BackendError, validate
from pathwise.subjectlang.interp import DEFAULT_STEP_BUDGET

DEFAULT_MAX_ROUNDS = 5
VALID, EXHAUSTED, INFEASIBLE = "valid", "exhausted", "infeasible-skipped"


@dataclass(frozen=True)
class Round:
    index: int
    request_kind: str
    candidate: Optional[str]
    outcome: object

    def to_json(self) -> dict:
        out = {"round": self.index, "request": self.request_kind, "outcome": self.outcome.kind}
        if self.outcome.kind == "backend-failure":
            out["message"] = self.outcome.message
        elif self.outcome.kind == "compile-error":
            out["diagnostics"] = [str(d) for d in self.outcome.diagnostics]
        elif self.outcome.kind == "valid" and self.outcome.warning:
            out["warning"] = self.outcome.warning
        return out


@dataclass
class RefinementSession:
    focal: str
    path: object
    context: object
    max_rounds: int = DEFAULT_MAX_ROUNDS
    rounds: list[Round] = field(default_factory=list)
    status: str = EXHAUSTED
    reason: str = ""
    prompt: Optional[PromptDocument] = None

    @property
    def test_source(self) -> Optional[str]:
        if self.status == VALID:
            return self.rounds[-1].candidate
        return None

    @property
    def trace(self):
        return self.rounds[-1].outcome.trace if self.status == VALID else None

    def to_json(self) -> dict:
        return {"focal": self.focal, "path": self.path.index, "status": self.status,
                "reason": self.reason, "rounds": [r.to_json() for r in self.rounds]}


def _next_request(prompt, context, rounds: list[Round], index: int):
    last = next((r for r in reversed(rounds) if r.candidate is not None), None)
    if last is None:
        return GenerateRequest(prompt, index, context)
    stage, failure = failure_of(last.outcome)
    return RepairRequest(prompt, last.candidate, stage, failure, index, context)


def run_session(focal: str, path, kb, backend, project, max_rounds: int = DEFAULT_MAX_ROUNDS,
                recursion_depth: int = DEFAULT_DEPTH, step_budget: int = DEFAULT_STEP_BUDGET,
                context=None) -> RefinementSession:
    """Generate a test for one path, feeding failures back for up to ``max_rounds`` rounds."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    ref = kb.method_of(focal).ref
    context = context or distill(ref, path, kb, recursion_depth)
    session = RefinementSession(ref, context.path, context, max_rounds)
    if context.infeasible:
        session.status, session.reason = INFEASIBLE, context.reason
        return session
    session.prompt = build_prompt(context, kb.focal_source_of(project, ref))
    for index in range(1, max_rounds + 1):
        request = _next_request(session.prompt, context, session.rounds, index)
        try:
            candidate = backend.produce(request)
        except InfeasibleContext as exc:
            session.status, session.reason = INFEASIBLE, str(exc)
            return session
        except BackendFailure as exc:
            session.rounds.append(Round(index, request.kind, None, BackendError(str(exc))))
            continue
        outcome = validate(candidate, project, ref, step_budget)
        session.rounds.append(Round(index, request.kind, candidate, outcome))
        if outcome.valid:
            session.status = VALID
            return session
    session.status = EXHAUSTED
    return session

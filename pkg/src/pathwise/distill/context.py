"""Assembling the distilled context for one (focal method, path) pair."""

from __future__ import annotations

import json
from dataclasses import dataclass

from pathwise.distill.plan import (InvocationPlan, VariableRequirement, collect_variable_requirements,
                                   plan_invocation, receiver_candidates)
from pathwise.distill.predicates import conjoin
from pathwise.distill.resolve import (DEFAULT_DEPTH, UNSAT, ResolutionResult, _own_conditions, _vocab,
                                      resolve_calls)
from pathwise.knowledge.cfg import CALL, Cfg
from pathwise.knowledge.paths import CfgPath
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.printer import pretty_expr


@dataclass(frozen=True)
class DistilledContext:
    focal: str
    path: CfgPath
    invocation: InvocationPlan
    variables: tuple[VariableRequirement, ...]
    resolutions: tuple[ResolutionResult, ...]
    obligations_rendered: tuple[str, ...]
    infeasible: bool = False
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "focal": self.focal,
            "path": {"index": self.path.index, "node_ids": list(self.path.node_ids),
                     "obligations": [[n, o] for n, o in self.path.obligations]},
            "invocation": self.invocation.to_json(),
            "variables": [v.to_json() for v in self.variables],
            "resolutions": [r.to_json() for r in self.resolutions],
            "obligations_rendered": list(self.obligations_rendered),
            "infeasible": self.infeasible,
            "reason": self.reason,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


def expand_temps(e, cfg: Cfg):
    """Replace call temps with the call expressions they stand for."""
    calls = {n.result: n.call for n in cfg.nodes if n.kind == CALL}

    def sub(x):
        if isinstance(x, A.Temp) and x.name in calls:
            return sub(calls[x.name])
        if isinstance(x, A.Binary):
            return A.Binary(x.op, sub(x.left), sub(x.right), x.span)
        if isinstance(x, A.Unary):
            return A.Unary(x.op, sub(x.operand), x.span)
        if isinstance(x, A.Call):
            return A.Call(x.receiver and sub(x.receiver), x.name, tuple(sub(a) for a in x.args), x.span)
        if isinstance(x, A.ReflectCall):
            return A.ReflectCall(x.receiver and sub(x.receiver), x.cls, x.name,
                                 tuple(sub(a) for a in x.args), x.span)
        if isinstance(x, A.FieldAccess):
            return A.FieldAccess(sub(x.obj), x.name, x.span)
        return x

    return sub(e)


def render_obligations(cfg: Cfg, path: CfgPath) -> tuple[str, ...]:
    out = []
    for node, outcome in path.obligations:
        n = cfg.node(node)
        guard = pretty_expr(expand_temps(n.guard, cfg))
        out.append(f"[{node}] line {n.span.line}: {guard} is {'true' if outcome else 'false'}")
    return tuple(out)


def distill(focal: str, path, kb, depth: int = DEFAULT_DEPTH) -> DistilledContext:
    ref = kb.method_of(focal).ref
    if not isinstance(path, CfgPath):
        path = kb.paths_of(ref)[path]
    plan = plan_invocation(ref, kb.facts)
    variables = tuple(collect_variable_requirements(ref, path, kb))
    deps = kb.deps_of(ref, path)
    resolutions = tuple(resolve_calls(deps.calls, kb, depth, plan.receiver_class))
    if any(r.status == UNSAT for r in resolutions) and plan.receiver_class is not None:
        # a virtual dependent call may only be satisfiable on another receiver class
        for _, cls in receiver_candidates(ref, kb.facts)[1:]:
            other = tuple(resolve_calls(deps.calls, kb, depth, cls))
            if not any(r.status == UNSAT for r in other):
                plan, resolutions = plan_invocation(ref, kb.facts, cls), other
                break
    rendered = render_obligations(kb.cfg_of(ref), path)
    reason = ""
    if any(r.status == UNSAT for r in resolutions):
        reason = "a dependent call cannot return what the path requires"
    else:
        own = [(g, o) for g, o in _own_conditions(ref, path, None, kb)
               if not any(g is h for h in deps.hazards)]
        guards = [(c.guard, c.outcome) for c in deps.conditions]
        own = [c for c in own if c in guards]
        if conjoin(own, _vocab(kb, ref), kb.facts.method(ref).param_names).predicate.empty:
            reason = "the path's own guards contradict each other"
    return DistilledContext(ref, path, plan, variables, resolutions, rendered, bool(reason), reason)

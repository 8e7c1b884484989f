"""Dependent-method constraint resolution.

For a call whose result must satisfy a return constraint, the callee's paths
that can produce such a value are ranked by simplicity and walked in order.
Each candidate's guards, the no-exception conditions of the built-ins it
uses, and its return constraint are conjoined into a parameter predicate;
the callee's own dependent calls are resolved recursively and folded in.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Optional

from pathwise.distill.plan import concrete_receiver, constant_table
from pathwise.distill.predicates import (EMPTY, FALSE, Derivation, ParamPredicate, Vocabulary,
                                         atomize, conjoin, hazard_conditions, intersect_predicates)
from pathwise.errors import NoConcreteReceiver, NoSuchMethod, NotFound
from pathwise.knowledge.deps import DependentCall, ReturnConstraint
from pathwise.knowledge.paths import CfgPath
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.dispatch import resolve_dispatch
from pathwise.subjectlang.printer import pretty_expr

DEFAULT_DEPTH = 3
MAX_COMBINATIONS = 4096

RESOLVED, DELEGATED, UNSAT = "resolved", "unresolved-delegated", "unsatisfiable"


@dataclass(frozen=True)
class ResolutionResult:
    callee: str
    required_return: Optional[ReturnConstraint]
    chosen_path: Optional[CfgPath]
    predicate: Optional[ParamPredicate]
    children: tuple = ()
    status: str = RESOLVED
    unresolved: tuple[str, ...] = ()  # guards handed to the generator verbatim
    call_node: Optional[int] = None
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "callee": self.callee,
            "call_node": self.call_node,
            "required_return": str(self.required_return) if self.required_return else None,
            "status": self.status,
            "chosen_path": self.chosen_path.index if self.chosen_path is not None else None,
            "predicate": self.predicate.render() if self.predicate is not None else None,
            "unresolved": list(self.unresolved),
            "reason": self.reason,
            "children": [c.to_json() for c in self.children],
        }


def callee_method(call: DependentCall, kb, receiver_class: Optional[str]) -> str:
    """Method reference a dependent call lands on, for the given receiver of the caller."""
    facts = kb.facts
    name = A.sig_name(call.callee)
    if call.owner is None:
        raise NotFound(call.callee)
    if call.call_kind in ("static", "private", "reflect"):
        m = facts.lookup_method(call.owner, name)
        if m is None:
            raise NotFound(call.callee)
        return m.ref
    if call.receiver is None and receiver_class is not None:
        cls = receiver_class
    elif isinstance(call.receiver, A.New):
        cls = call.receiver.cls
    else:
        cls = concrete_receiver(call.owner, facts)[1]
    return resolve_dispatch(cls, call.callee, facts).ref


def candidate_paths_for_return(callee: str, rc: ReturnConstraint, kb) -> list[CfgPath]:
    """Paths of ``callee`` whose return expression may satisfy ``rc``."""
    m = kb.facts.method(callee)
    vocab = Vocabulary(dict(m.params), constant_table(kb.facts, m.owner))
    out = []
    for p in kb.paths_of(callee):
        ret = kb.deps_of(callee, p).return_expr
        if ret is None:
            continue
        if isinstance(ret, A.LITERALS) and not isinstance(ret, A.NullLit):
            if rc.admits(ret.value):
                out.append(p)
            continue
        if any(atomize(g, o, vocab) == FALSE for g, o in rc.conditions(ret)):
            continue  # provably violates rc
        out.append(p)
    return out


def rank_key(method: str, path: CfgPath, kb) -> tuple[int, int, int]:
    deps = kb.deps_of(method, path)
    return (len({c.node for c in deps.calls}), len(deps.variables),
            path.statement_count(kb.cfg_of(method)))


def rank_paths(candidates, kb, method: Optional[str] = None) -> list[CfgPath]:
    """Stable sort by (dependent methods, dependent variables, statement nodes)."""
    candidates = list(candidates)
    if method is None:
        method = _owner_of_paths(candidates, kb)
    return sorted(candidates, key=lambda p: rank_key(method, p, kb))


def _owner_of_paths(paths, kb) -> str:
    owners = {p.method for p in paths}
    if len(owners) != 1 or not next(iter(owners)):
        raise NotFound("candidate paths do not belong to a single method")
    return owners.pop()


def _vocab(kb, method: str) -> Vocabulary:
    m = kb.facts.method(method)
    return Vocabulary(dict(m.params), constant_table(kb.facts, m.owner))


def _own_conditions(method: str, path: CfgPath, rc: Optional[ReturnConstraint], kb):
    """Guards (minus those answered by dependent calls), hazard bounds and the return condition."""
    deps = kb.deps_of(method, path)
    answered = {c.guard for c in deps.calls if c.required_return is not None}
    out = []
    for c in deps.conditions:
        if c.guard in answered and any(isinstance(n, A.Temp) for n in A.walk(c.guard)):
            continue
        out.append((c.guard, c.outcome))
    for h in deps.hazards:
        out.extend(hazard_conditions(h))
    ret = deps.return_expr
    if rc is not None and ret is not None and not isinstance(ret, A.LITERALS):
        out.extend(rc.conditions(ret))
    return out


def derive_param_predicate(callee: str, path: CfgPath, rc: Optional[ReturnConstraint], kb) -> Derivation:
    """Predicate from the path's own guards; dependent calls on the path are not folded here."""
    m = kb.facts.method(callee)
    return conjoin(_own_conditions(callee, path, rc, kb), _vocab(kb, callee), m.param_names)


def _fold_child(child: ResolutionResult, call: DependentCall, kb):
    """The child's predicate restated over the caller's parameters, as conditions."""
    callee = kb.facts.method(child.callee)
    binding = dict(zip(callee.param_names, call.args))
    out = []
    for guard, outcome in child.predicate.conditions():
        out.append((_bind(guard, binding), outcome))
    return out


def _bind(e, binding):
    if isinstance(e, A.Name):
        return binding.get(e.ident, e)
    if isinstance(e, A.Binary):
        return dataclasses.replace(e, left=_bind(e.left, binding), right=_bind(e.right, binding))
    if isinstance(e, A.Unary):
        return dataclasses.replace(e, operand=_bind(e.operand, binding))
    if isinstance(e, A.Call):
        return dataclasses.replace(e, args=tuple(_bind(a, binding) for a in e.args))
    return e


def _render(conds) -> tuple[str, ...]:
    return tuple(f"{pretty_expr(g)} is {'true' if o else 'false'}" for g, o in conds)


def _options(call: DependentCall, kb, depth: int, receiver_class: Optional[str]) -> list[ResolutionResult]:
    """One result per candidate path of the callee, in rank order."""
    rc = call.required_return
    try:
        callee = callee_method(call, kb, receiver_class)
    except (NotFound, NoSuchMethod, NoConcreteReceiver) as exc:
        return [ResolutionResult(call.callee, rc, None, None, (), DELEGATED,
                                 _render([(call.guard, call.outcome)]), call.node, f"no target: {exc}")]
    if rc is None:
        return [ResolutionResult(callee, None, None, None, (), DELEGATED,
                                 _render([(call.guard, call.outcome)]), call.node,
                                 "guard shape outside the return-constraint vocabulary")]
    if depth <= 0:
        return [ResolutionResult(callee, rc, None, None, (), DELEGATED,
                                 _render([(call.guard, call.outcome)]), call.node,
                                 "recursion depth exhausted")]
    if kb.facts.method(callee).is_abstract:
        return [ResolutionResult(callee, rc, None, None, (), DELEGATED, (), call.node, "abstract callee")]
    m = kb.facts.method(callee)
    inner_receiver = receiver_class if not m.is_static else None
    if call.receiver is not None and isinstance(call.receiver, A.New):
        inner_receiver = call.receiver.cls
    ranked = rank_paths(candidate_paths_for_return(callee, rc, kb), kb, callee)
    out = []
    for path in ranked:
        own = _own_conditions(callee, path, rc, kb)
        children = resolve_calls(kb.deps_of(callee, path).calls, kb, depth - 1, inner_receiver)
        if any(c.status == UNSAT for c in children):
            out.append(ResolutionResult(callee, rc, path, EMPTY, tuple(children), UNSAT, (), call.node,
                                        "a dependent call on this path cannot be satisfied"))
            continue
        conds = list(own)
        unresolved = []
        reason = ""
        for child, dc in zip(children, kb.deps_of(callee, path).calls):
            if child.status == RESOLVED:
                conds.extend(_fold_child(child, dc, kb))
            else:
                unresolved.extend(child.unresolved)
                reason = "a dependent call on this path is delegated"
        d = conjoin(conds, _vocab(kb, callee), m.param_names)
        if d.predicate.empty:
            out.append(ResolutionResult(callee, rc, path, d.predicate, tuple(children), UNSAT, (),
                                        call.node, "path conditions contradict"))
            continue
        if d.unsupported:
            unresolved = list(_render(d.unsupported)) + unresolved
            reason = reason or "guards outside the predicate vocabulary"
        status = DELEGATED if unresolved or reason else RESOLVED
        out.append(ResolutionResult(callee, rc, path, d.predicate, tuple(children), status,
                                    tuple(unresolved), call.node, reason))
    if not out:
        out.append(ResolutionResult(callee, rc, None, EMPTY, (), UNSAT, (), call.node,
                                    "no path can produce the required return"))
    return out


def _pick(options: list[ResolutionResult]) -> ResolutionResult:
    for status in (RESOLVED, DELEGATED):
        for o in options:
            if o.status == status:
                return o
    return options[0]


def resolve_dependent_method(call: DependentCall, kb, depth: int = DEFAULT_DEPTH,
                             receiver_class: Optional[str] = None) -> ResolutionResult:
    return _pick(_options(call, kb, depth, receiver_class))


def _invocation_key(call: DependentCall):
    return (call.callee, call.owner, call.receiver, call.args)


def resolve_calls(calls, kb, depth: int, receiver_class: Optional[str]) -> list[ResolutionResult]:
    """Resolve every call; repeated invocations with identical arguments are intersected."""
    calls = list(calls)
    results: list[Optional[ResolutionResult]] = [None] * len(calls)
    groups: dict = {}
    for i, c in enumerate(calls):
        groups.setdefault(_invocation_key(c), []).append(i)
    for members in groups.values():
        opts = [_options(calls[i], kb, depth, receiver_class) for i in members]
        if len(members) == 1:
            results[members[0]] = _pick(opts[0])
            continue
        chosen = _joint(opts)
        for i, r in zip(members, chosen):
            results[i] = r
    return results


def _joint(opts: list[list[ResolutionResult]]) -> list[ResolutionResult]:
    """First combination (in rank order) whose resolved predicates intersect non-empty."""
    resolved = [[o for o in lst if o.status == RESOLVED] for lst in opts]
    if all(resolved):
        for n, combo in enumerate(itertools.product(*resolved)):
            if n >= MAX_COMBINATIONS:
                break
            joint = intersect_predicates([o.predicate for o in combo])
            if not joint.empty:
                return [dataclasses.replace(o, predicate=joint) for o in combo]
    delegated = [[o for o in lst if o.status == DELEGATED] for lst in opts]
    if all(r or d for r, d in zip(resolved, delegated)) and any(delegated):
        out = []
        for r, d in zip(resolved, delegated):
            o = d[0] if d else r[0]
            out.append(dataclasses.replace(o, status=DELEGATED,
                                           reason=o.reason or "repeated invocation not decidable"))
        return out
    return [dataclasses.replace(lst[0], status=UNSAT, reason="repeated invocations have no common input")
            if lst[0].status != UNSAT else lst[0] for lst in opts]

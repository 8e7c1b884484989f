"""How to call the focal method, and which fields a path needs set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from pathwise.errors import NoConcreteReceiver
from pathwise.distill.predicates import Vocabulary, atomize, TRUE, FALSE, UNSUPPORTED
from pathwise.knowledge.facts import TypeFacts
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.dispatch import resolve_dispatch
from pathwise.subjectlang.printer import pretty_expr


@dataclass(frozen=True)
class InvocationPlan:
    kind: str  # static-direct, static-reflective, instance-direct, instance-reflective, constructor
    receiver_recipe: str  # none, new-concrete, new-concrete-subclass
    receiver_class: Optional[str]
    dispatch_target: str
    needs_reflection: bool

    def to_json(self) -> dict:
        return {"kind": self.kind, "receiver_recipe": self.receiver_recipe,
                "receiver_class": self.receiver_class, "dispatch_target": self.dispatch_target,
                "needs_reflection": self.needs_reflection}


def concrete_receiver(cls: str, facts: TypeFacts) -> tuple[str, str]:
    """(recipe, class) for obtaining an instance whose static type is ``cls``.

    An abstract class is replaced by its nearest concrete descendant; among
    descendants at the same depth the smallest name wins.
    """
    if facts.cls(cls).instantiable:
        return "new-concrete", cls
    subs = facts.concrete_subclasses(cls)
    if not subs:
        raise NoConcreteReceiver(f"{cls} is abstract and has no concrete subclass")
    best = min(subs, key=lambda c: (facts.chain(c).index(cls), c))
    return "new-concrete-subclass", best


def receiver_candidates(focal: str, facts: TypeFacts) -> list[tuple[str, str]]:
    """Every (recipe, class) receiver on which calling the focal method runs the focal method.

    The :func:`concrete_receiver` choice comes first when it qualifies, then the
    rest by depth below the owner and name.
    """
    m = facts.method(focal)
    pool = ([m.owner] if facts.cls(m.owner).instantiable else []) + sorted(
        facts.concrete_subclasses(m.owner), key=lambda c: (facts.chain(c).index(m.owner), c))
    hits = [c for c in pool
            if m.access == "private" or resolve_dispatch(c, m.signature, facts).ref == m.ref]
    try:
        first = concrete_receiver(m.owner, facts)[1]
    except NoConcreteReceiver:
        first = None
    if first in hits:
        hits.remove(first)
        hits.insert(0, first)
    return [("new-concrete" if c == m.owner else "new-concrete-subclass", c) for c in hits]


def plan_invocation(focal: str, facts: TypeFacts, receiver: Optional[str] = None) -> InvocationPlan:
    """How to call ``focal``; ``receiver`` overrides the default receiver class."""
    m = facts.method(focal)
    private = m.access == "private"
    if m.is_static:
        kind = "static-reflective" if private else "static-direct"
        return InvocationPlan(kind, "none", None, m.ref, private)
    if receiver is not None:
        recipe, cls = ("new-concrete" if receiver == m.owner else "new-concrete-subclass"), receiver
    else:
        options = receiver_candidates(focal, facts)
        # fall back to the nearest concrete class even if it overrides the focal method
        recipe, cls = options[0] if options else concrete_receiver(m.owner, facts)
    target = m if private else resolve_dispatch(cls, m.signature, facts)
    kind = "instance-reflective" if target.access == "private" else "instance-direct"
    return InvocationPlan(kind, recipe, cls, target.ref, target.access == "private")


@dataclass(frozen=True)
class VariableRequirement:
    field: str
    owner: str
    name: str
    declared_type: str
    access: str
    is_static: bool
    receiver: str  # static, this, other
    set_via: str  # direct-assignment, reflect-set
    hint: object = None  # atom over the field, when the path's guards pin it down directly

    def to_json(self) -> dict:
        return {"field": self.field, "declared_type": self.declared_type, "access": self.access,
                "is_static": self.is_static, "receiver": self.receiver, "set_via": self.set_via,
                "hint": self.hint.render(self.name) if self.hint is not None else None}


def constant_table(facts: TypeFacts, owner: str) -> dict:
    """Printed form -> value for every constant field visible from ``owner``."""
    out = {}
    for f in facts.fields:
        if not f.is_constant:
            continue
        out[f"{f.owner}.{f.name}"] = f.initializer
        if facts.field_owner(owner, f.name) == f.owner:
            out[f.name] = f.initializer
    return out


def _field_key(v) -> list[str]:
    return [v.name] if v.receiver in ("this", "static") else []


def collect_variable_requirements(focal: str, path, kb) -> list[VariableRequirement]:
    facts = kb.facts
    m = facts.method(focal)
    deps = kb.deps_of(focal, path)
    out = []
    for v in deps.variables:
        hint = None
        for key in _field_key(v) + ([f"{v.owner}.{v.name}"] if v.is_static else []):
            vocab = Vocabulary({key: v.declared_type},
                               {k: c for k, c in constant_table(facts, m.owner).items() if k != key})
            for cond in deps.conditions:
                names = {pretty_expr(n) for n in A.walk(cond.guard)
                         if isinstance(n, (A.Name, A.FieldAccess))}
                if key not in names or _mentions_other(cond.guard, key, facts, m):
                    continue
                res = atomize(cond.guard, cond.outcome, vocab)
                if res in (TRUE, FALSE, UNSUPPORTED):
                    continue
                for subject, atom in res:
                    if pretty_expr(subject) == key:
                        hint = atom if hint is None else hint.intersect(atom)
        out.append(VariableRequirement(v.field, v.owner, v.name, v.declared_type, v.access,
                                       v.is_static, v.receiver,
                                       "reflect-set" if v.access == "private" else "direct-assignment",
                                       hint))
    return out


def _mentions_other(guard, key: str, facts, m) -> bool:
    """True when the guard reads a parameter, temp or another field besides ``key``."""
    params = set(m.param_names)
    for n in A.walk(guard):
        if isinstance(n, A.Temp):
            return True
        if isinstance(n, A.Name) and n.ident in params:
            return True
        if isinstance(n, A.FieldAccess) and pretty_expr(n) != key and not isinstance(n.obj, A.Name):
            return True
    return False

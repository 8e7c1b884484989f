"""Deterministic oracle backend: exhaustive search over small value domains."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from pathwise.errors import EngineError, InfeasibleContext
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.interp import Interpreter
from pathwise.subjectlang.printer import pretty_expr
from pathwise.genloop.validate import TEST_CLASS
from pathwise.knowledge.cfg import build_cfg
from pathwise.knowledge.facts import written_fields

ALPHABET = "AEIOUYBCX"
SEARCH_TYPES = ("int", "bool", "char")


@dataclass(frozen=True)
class Domains:
    int_min: int = -8
    int_max: int = 8
    chars: str = ALPHABET
    max_string_length: int = 3
    extra_strings: tuple[str, ...] = ()

    @classmethod
    def for_project(cls, project, **overrides) -> "Domains":
        """Default domains plus every string literal the project contains."""
        overrides.setdefault("extra_strings", tuple(project.string_constants()))
        return cls(**overrides)

    def ints(self) -> list[int]:
        return list(range(self.int_min, self.int_max + 1))

    def strings(self) -> list[str]:
        out = [""]
        for n in range(1, self.max_string_length + 1):
            out.extend("".join(t) for t in itertools.product(self.chars, repeat=n))
        seen = set(out)
        out.extend(s for s in sorted(self.extra_strings) if s not in seen)
        return out

    def values(self, type_name: str, project=None) -> list:
        if type_name == "int":
            return self.ints()
        if type_name == "bool":
            return [True, False]
        if type_name == "char":
            return list(self.chars)
        if type_name == "string":
            return self.strings()
        if project is None:
            return [None]
        # class-typed: a fresh instance of every concrete assignable class, then null
        classes = [c for c in sorted(project.classes)
                   if project.is_subclass(c, type_name) and not project.classes[c].is_abstract]
        return [A.New(c) for c in classes] + [None]


@dataclass(frozen=True)
class Unsat:
    """No point of the search space drives the focal method down the path."""

    reason: str
    tried: int = 0


@dataclass(frozen=True)
class FieldSetting:
    owner: str
    name: str
    declared_type: str
    access: str
    is_static: bool
    value: object


@dataclass(frozen=True)
class Solution:
    args: tuple
    fields: tuple[FieldSetting, ...]
    tried: int = 0
    notes: tuple[str, ...] = field(default=())


def literal(value, type_name: str) -> A.Expr:
    """Source literal for a domain value of the given declared type."""
    if isinstance(value, A.New):
        return value
    if value is None:
        return A.NullLit()
    if type_name == "char":
        return A.CharLit(value)
    if type_name == "string":
        return A.StrLit(value)
    if type_name == "bool":
        return A.BoolLit(value)
    return A.IntLit(value)


def _lit(value, type_name: str) -> str:
    return pretty_expr(literal(value, type_name))


def _field_domain(var, project, domains: Domains) -> list:
    decl = project.classes[var.owner].field(var.name)
    initial = decl.initializer.value if decl.initializer is not None else A.default_value(var.declared_type)
    if var.declared_type not in SEARCH_TYPES:
        return [initial]
    values = domains.values(var.declared_type)
    # the field's own starting value is tried first so untouched state is preferred
    return [initial] + [v for v in values if v != initial]


@dataclass(frozen=True)
class _Field:
    owner: str
    name: str
    declared_type: str
    access: str
    is_static: bool


def state_fields(project, focal: str, receiver_class) -> list[_Field]:
    """Mutable int, bool and char fields read by ``focal`` or by what it calls on the same object.

    Unqualified calls are followed transitively (dispatching on
    ``receiver_class``); fields of other objects are not included.
    """
    written = written_fields(project)
    seen_methods, out, keys = set(), [], set()
    todo = [project.method(focal)]
    while todo:
        m = todo.pop(0)
        if m is None or m.ref in seen_methods or m.body is None:
            continue
        seen_methods.add(m.ref)
        local = {p.name for p in m.params} | {s.name for s in A.statements(m.body) if isinstance(s, A.VarDecl)}
        for node in A.walk(m.body):
            if isinstance(node, A.Name) and node.ident not in local:
                here = receiver_class if (receiver_class and not m.is_static) else m.owner
                owner = project.field_owner(here, node.ident) or project.field_owner(m.owner, node.ident)
                decl = project.classes[owner].field(node.ident) if owner else None
            elif isinstance(node, A.FieldAccess) and isinstance(node.obj, A.Name) and node.obj.ident in project.classes:
                owner = project.field_owner(node.obj.ident, node.name)
                decl = project.classes[owner].field(node.name) if owner else None
            elif isinstance(node, A.Call) and node.receiver is None and node.name not in A.BUILTINS:
                callee = project.lookup_method(m.owner, node.name)
                if callee is not None and not callee.is_static and callee.access == "public" and receiver_class:
                    callee = project.lookup_method(receiver_class, node.name) or callee
                todo.append(callee)
                continue
            else:
                continue
            if decl is None or decl.declared_type not in SEARCH_TYPES or (owner, decl.name) in keys:
                continue
            if decl.is_static and decl.initializer is not None and (owner, decl.name) not in written:
                continue  # a constant
            if not decl.is_static and (receiver_class is None or m.is_static):
                continue
            keys.add((owner, decl.name))
            out.append(_Field(owner, decl.name, decl.declared_type, decl.access, decl.is_static))
    return out


def _searchable_fields(context, project):
    """The path's dependent variables first, then other state the focal method reads."""
    out, keys = [], set()
    for v in context.variables:
        if v.receiver not in ("this", "static"):
            continue
        if v.receiver == "this" and context.invocation.receiver_class is None:
            continue
        out.append(v)
        keys.add((v.owner, v.name))
    extra = [f for f in state_fields(project, context.focal, context.invocation.receiver_class)
             if (f.owner, f.name) not in keys]
    return out + sorted(extra, key=lambda f: (f.owner, f.name))


def search(context, project, domains: Domains, limit: int = 200_000):
    """First (fields, args) point, in enumeration order, whose focal branch events match the path."""
    if context.infeasible:
        raise InfeasibleContext(context.reason)
    focal = project.method(context.focal)
    plan = context.invocation
    want = _expected(context, project)
    variables = _searchable_fields(context, project)
    field_domains = [_field_domain(v, project, domains) for v in variables]
    arg_domains = [domains.values(p.type, project) for p in focal.params]
    interp = Interpreter(project, focal=context.focal, record_statements=False)
    virtual = plan.kind == "instance-direct"
    tried = 0
    # fields vary slowest: each field assignment is paired with every argument tuple
    for fvals in itertools.product(*field_domains):
        statics, instance = {}, {}
        for v, val in zip(variables, fvals):
            (statics if v.is_static else instance)[(v.owner, v.name)] = val
        for args in itertools.product(*arg_domains):
            tried += 1
            if tried > limit:
                return Unsat(f"search limit of {limit} points reached", tried - 1)
            try:
                trace = interp.invoke(context.focal, args, plan.receiver_class, statics, instance, virtual)
            except EngineError:
                continue
            if trace.focal_branch_outcomes() == want:
                settings = tuple(FieldSetting(v.owner, v.name, v.declared_type, v.access, v.is_static, val)
                                 for v, val in zip(variables, fvals))
                return Solution(tuple(args), settings, tried)
    return Unsat("no input in the value domains drives the focal method down this path", tried)


def _expected(context, project) -> list:
    cfg = build_cfg(project.method(context.focal), project)
    return [(cfg.node(n).span, outcome) for n, outcome in context.path.obligations]


def emit_test(context, project, solution: Solution, reflective: bool = True) -> str:
    """Render a solution as a test program.

    With ``reflective=False`` private members are accessed directly; such a
    program is expected to fail checking, which is how reflection is shown to be
    necessary.
    """
    focal = project.method(context.focal)
    plan = context.invocation
    owner, name = focal.owner, focal.name
    body: list[str] = []
    if plan.receiver_class is not None:
        body.append(f"{plan.receiver_class} receiver = new {plan.receiver_class}();")
    for s in solution.fields:
        value = _lit(s.value, s.declared_type)
        shadowed = (not s.is_static and plan.receiver_class is not None
                    and project.field_owner(plan.receiver_class, s.name) != s.owner)
        if (s.access == "private" and reflective) or shadowed:
            target = f"{s.owner}#{s.name}" if s.is_static else f"receiver.{s.owner}#{s.name}"
            body.append(f"reflect set {target} = {value};")
        else:
            target = f"{s.owner}.{s.name}" if s.is_static else f"receiver.{s.name}"
            body.append(f"{target} = {value};")
    args = ", ".join(_lit(a, p.type) for a, p in zip(solution.args, focal.params))
    private = focal.access == "private"
    if focal.is_static:
        call = f"reflect call {owner}#{name}({args})" if private and reflective else f"{owner}.{name}({args})"
    elif private and reflective:
        call = f"reflect call receiver.{owner}#{name}({args})"
    else:
        call = f"receiver.{name}({args})"
    body.append(f"{call};" if focal.return_type == "void" else f"{focal.return_type} result = {call};")
    lines = [f"class {TEST_CLASS} {{", "  public static void test() {"]
    lines += [f"    {line}" for line in body]
    lines += ["  }", "}", ""]
    return "\n".join(lines)


def brute_force_generate(context, project, domains: Domains | None = None, reflective: bool = True):
    """Test source for the first matching point, or :class:`Unsat`."""
    domains = domains or Domains.for_project(project)
    found = search(context, project, domains)
    if isinstance(found, Unsat):
        return found
    return emit_test(context, project, found, reflective)

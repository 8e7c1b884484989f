"""Per-path data-flow dependencies.

Locals are substituted symbolically along the path, so every guard is
expressed over parameters, fields, constants and the results of user-method
calls. Built-in calls are folded back into the expressions that use them.
Each user call whose result reaches a guard becomes a :class:`DependentCall`
with the return constraint that the guard's required outcome imposes on it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from pathwise.knowledge.cfg import BRANCH, CALL, STATEMENT, Cfg
from pathwise.knowledge.paths import CfgPath, leave_loop
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.printer import pretty_expr

COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
NEGATE = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
FLIP = {"==": "==", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}
HAZARD_BUILTINS = ("charAt", "substring")


@dataclass(frozen=True)
class ReturnConstraint:
    """What a path needs a call to return.

    kind is one of equals, not-equals, truthy, falsy, in-int-range, sign.
    For equals/not-equals, ``value`` is the literal node being compared with.
    ``in-int-range`` bounds are inclusive and ``None`` means unbounded;
    ``sign`` carries ``"negative"`` or ``"nonnegative"`` in ``value``.
    """

    kind: str
    value: object = None
    lo: Optional[int] = None
    hi: Optional[int] = None

    def admits(self, v) -> bool:
        k = self.kind
        if k == "truthy":
            return v is True
        if k == "falsy":
            return v is False
        if k == "equals":
            return v == self.value.value
        if k == "not-equals":
            return v != self.value.value
        if isinstance(v, bool) or not isinstance(v, int):
            return False
        if k == "sign":
            return (v < 0) if self.value == "negative" else (v >= 0)
        if k == "in-int-range":
            return (self.lo is None or v >= self.lo) and (self.hi is None or v <= self.hi)
        raise ValueError(k)

    def conditions(self, expr) -> list[tuple[object, bool]]:
        """The constraint as (guard, outcome) pairs over ``expr``."""
        k = self.kind
        if k in ("truthy", "falsy"):
            return [(expr, k == "truthy")]
        if k in ("equals", "not-equals"):
            return [(A.Binary("==", expr, self.value), k == "equals")]
        if k == "sign":
            return [(A.Binary("<", expr, A.IntLit(0)), self.value == "negative")]
        out = []
        if self.lo is not None:
            out.append((A.Binary(">=", expr, A.IntLit(self.lo)), True))
        if self.hi is not None:
            out.append((A.Binary("<=", expr, A.IntLit(self.hi)), True))
        return out

    def __str__(self) -> str:
        if self.kind in ("truthy", "falsy"):
            return self.kind
        if self.kind == "sign":
            return self.value
        if self.kind == "in-int-range":
            lo = "-inf" if self.lo is None else self.lo
            hi = "+inf" if self.hi is None else self.hi
            return f"in [{lo}, {hi}]"
        return f"{self.kind} {pretty_expr(self.value)}"


@dataclass(frozen=True)
class Condition:
    node: int
    guard: object  # substituted atomic condition
    outcome: bool


@dataclass(frozen=True)
class DependentVariable:
    field: str  # "Owner.name"
    owner: str
    name: str
    access: str
    is_static: bool
    declared_type: str
    receiver: str  # static, this, other
    role: str = "appears-in-guard"


@dataclass(frozen=True)
class DependentCall:
    node: int
    callee: str  # signature
    owner: Optional[str]  # static class the call resolves from
    call_kind: str
    receiver: object  # substituted receiver expression, or None for implicit this / static
    args: tuple
    guard: object  # the substituted guard the result feeds
    outcome: bool
    required_return: Optional[ReturnConstraint]  # None when the guard shape is not expressible


@dataclass(frozen=True)
class PathDependencies:
    variables: tuple[DependentVariable, ...] = ()
    calls: tuple[DependentCall, ...] = ()
    conditions: tuple[Condition, ...] = ()
    hazards: tuple = ()  # substituted expressions that may raise (charAt, substring, / and %)
    return_expr: object = None


def _subst(e, env):
    if e is None:
        return None
    if isinstance(e, A.Name):
        return env.get(e.ident, e)
    if isinstance(e, A.Temp):
        return env.get(e.name, e)
    if isinstance(e, A.Binary):
        return dataclasses.replace(e, left=_subst(e.left, env), right=_subst(e.right, env))
    if isinstance(e, A.Unary):
        return dataclasses.replace(e, operand=_subst(e.operand, env))
    if isinstance(e, A.FieldAccess):
        obj = e.obj
        if isinstance(obj, A.Name) and obj.ident not in env:
            return e
        return dataclasses.replace(e, obj=_subst(obj, env))
    if isinstance(e, (A.Call, A.ReflectCall)):
        recv = _subst(e.receiver, env) if e.receiver is not None else None
        return dataclasses.replace(e, receiver=recv, args=tuple(_subst(a, env) for a in e.args))
    return e


def _hazards_in(e, out: list):
    for node in A.walk(e):
        hazard = (isinstance(node, A.Binary) and node.op in ("/", "%")
                  and not (isinstance(node.right, A.IntLit) and node.right.value != 0)) \
            or (isinstance(node, A.Call) and node.receiver is None and node.name in HAZARD_BUILTINS)
        if hazard and node not in out:
            out.append(node)


def return_constraint(guard, temp: str, outcome: bool, return_type: str) -> Optional[ReturnConstraint]:
    """The constraint ``outcome`` of ``guard`` places on the call result ``temp``."""
    if isinstance(guard, A.Temp) and guard.name == temp and return_type == "bool":
        return ReturnConstraint("truthy" if outcome else "falsy")
    if not (isinstance(guard, A.Binary) and guard.op in COMPARISONS):
        return None
    op, left, right = guard.op, guard.left, guard.right
    if isinstance(right, A.Temp) and right.name == temp:
        op, left, right = FLIP[op], right, left
    if not (isinstance(left, A.Temp) and left.name == temp and isinstance(right, A.LITERALS)):
        return None
    if isinstance(right, A.NullLit):
        return None
    c = right.value
    if not outcome:
        op = NEGATE[op]
    if op == "==":
        return ReturnConstraint("equals", right)
    if op == "!=":
        return ReturnConstraint("not-equals", right)
    if return_type != "int" or isinstance(c, bool) or not isinstance(c, int):
        return None
    if op == "<":
        return ReturnConstraint("sign", "negative") if c == 0 else ReturnConstraint("in-int-range", lo=None, hi=c - 1)
    if op == ">=":
        return ReturnConstraint("sign", "nonnegative") if c == 0 else ReturnConstraint("in-int-range", lo=c, hi=None)
    if op == "<=":
        return ReturnConstraint("in-int-range", lo=None, hi=c)
    return ReturnConstraint("in-int-range", lo=c + 1, hi=None)


def _temps_in(e) -> list[str]:
    out = []
    for node in A.walk(e):
        if isinstance(node, A.Temp) and node.name not in out:
            out.append(node.name)
    return out


def collect_dependencies(method, path: CfgPath, cfg: Cfg, facts) -> PathDependencies:
    """Dependencies of ``path`` through ``method`` (a MethodFact or MethodDecl)."""
    params = {p if isinstance(p, str) else p.name for p in _param_names(method)}
    param_types = dict(_param_pairs(method))
    env: dict[str, object] = {}
    local_types = dict(param_types)
    user_calls: dict[str, object] = {}
    conditions: list[Condition] = []
    hazards: list = []
    return_expr = None
    obls = list(path.obligations)
    k = 0
    visited: set[int] = set()
    ids = path.node_ids
    for i, n in enumerate(ids):
        node = cfg.node(n)
        visited.add(n)
        if node.kind == STATEMENT:
            s = node.stmt
            if isinstance(s, A.VarDecl):
                local_types[s.name] = s.type
                value = _subst(s.init, env) if s.init is not None else _default_lit(s.type)
                env[s.name] = value
                _hazards_in(value, hazards)
            elif isinstance(s, A.Assign):
                value = _subst(s.value, env)
                _hazards_in(value, hazards)
                if isinstance(s.target, A.Name):
                    env[s.target.ident] = value
            elif isinstance(s, A.Return):
                return_expr = _subst(s.value, env)
                if return_expr is not None:
                    _hazards_in(return_expr, hazards)
            elif isinstance(s, A.ExprStmt):
                _hazards_in(_subst(s.expr, env), hazards)
            elif isinstance(s, A.ReflectSet):
                _hazards_in(_subst(s.value, env), hazards)
        elif node.kind == CALL:
            call = _subst(node.call, env)
            _hazards_in(call, hazards)
            if node.call_kind == "builtin":
                env[node.result] = call
            else:
                user_calls[node.result] = (node, call)
        elif node.kind == BRANCH:
            want_node, outcome = obls[k]
            k += 1
            guard = _subst(node.guard, env)
            _hazards_in(guard, hazards)
            conditions.append(Condition(n, guard, outcome))
        # a step with no matching edge is a loop jump; its exit obligations are
        # re-evaluated here, after the body has updated the locals
        pending = 0
        if i + 1 < len(ids) and all(dst != ids[i + 1] for dst, _ in cfg.succ(n)):
            for dst, _ in cfg.succ(n):
                left = leave_loop(cfg, dst, visited) if dst in visited else None
                if left is not None and left[0] == ids[i + 1]:
                    pending = len(left[1])
                    break
        for _ in range(pending):
            b, outcome = obls[k]
            k += 1
            guard = _subst(cfg.node(b).guard, env)
            _hazards_in(guard, hazards)
            conditions.append(Condition(b, guard, outcome))

    calls = []
    for cond in conditions:
        for t in _temps_in(cond.guard):
            if t not in user_calls:
                continue
            node, call = user_calls[t]
            target = facts.lookup_method(node.callee_owner, A.sig_name(node.callee)) \
                if node.callee_owner is not None else None
            rtype = target.return_type if target is not None else "?"
            calls.append(DependentCall(node.id, node.callee, node.callee_owner, node.call_kind,
                                       call.receiver, call.args, cond.guard, cond.outcome,
                                       return_constraint(cond.guard, t, cond.outcome, rtype)))

    owner = method.owner
    variables: list[DependentVariable] = []
    seen: set[str] = set()

    def add_field(cls, name, receiver):
        fowner = facts.field_owner(cls, name) if cls is not None else None
        if fowner is None:
            return
        f = facts.field(fowner, name)
        if f.ref in seen:
            return
        seen.add(f.ref)
        rec = "static" if f.is_static else receiver
        variables.append(DependentVariable(f.ref, fowner, name, f.access, f.is_static, f.type, rec))

    exprs = [c.guard for c in conditions]
    for c in calls:
        exprs.extend(c.args)
        if c.receiver is not None:
            exprs.append(c.receiver)
    for e in exprs:
        for node in A.walk(e):
            if isinstance(node, A.Name) and node.ident not in params and not isinstance(node, A.Temp):
                add_field(owner, node.ident, "this")
            elif isinstance(node, A.FieldAccess):
                obj = node.obj
                if isinstance(obj, A.New):
                    add_field(obj.cls, node.name, "other")
                elif isinstance(obj, A.Name) and obj.ident in local_types:
                    add_field(local_types[obj.ident], node.name, "other")
                elif isinstance(obj, A.Name) and facts.has_class(obj.ident):
                    add_field(obj.ident, node.name, "static")
    return PathDependencies(tuple(variables), tuple(calls), tuple(conditions), tuple(hazards),
                            return_expr)


def _param_pairs(method):
    if hasattr(method, "params") and method.params and isinstance(method.params[0], tuple):
        return list(method.params)
    return [(p.name, p.type) for p in method.params]


def _param_names(method):
    return [n for n, _ in _param_pairs(method)]


def _default_lit(type_name: str):
    v = A.default_value(type_name)
    if v is None:
        return A.NullLit()
    if isinstance(v, bool):
        return A.BoolLit(v)
    if isinstance(v, int):
        return A.IntLit(v)
    if type_name == "char":
        return A.CharLit(v)
    return A.StrLit(v)

"""Per-method control-flow graphs.

Every call expression is lifted into its own ``call`` node whose result lands
in a synthetic temp (``$t0``, ``$t1`` ...), and guards are split through
``&&``, ``||`` and ``!`` so that each atomic condition becomes one ``branch``
node. Node ids follow creation order, which is source order; the exit node is
numbered last.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from pathwise.errors import AbstractMethodError
from pathwise.subjectlang import ast as A

ENTRY, EXIT, STATEMENT, CALL, BRANCH = "entry", "exit", "statement", "call", "branch"


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: str
    span: A.Span = A.NOSPAN
    loop_head: bool = False
    stmt: object = None  # statement nodes: the statement with calls replaced by temps
    guard: object = None  # branch nodes: the atomic condition
    call: object = None  # call nodes: the call expression (arguments already lifted)
    result: Optional[str] = None
    callee: Optional[str] = None  # signature, e.g. "contains(string,int)"
    callee_owner: Optional[str] = None  # static class to resolve from; None for built-ins
    call_kind: Optional[str] = None  # builtin, static, private, virtual, reflect


@dataclass(frozen=True)
class CfgEdge:
    src: int
    dst: int
    label: str  # seq, true, false


@dataclass(frozen=True)
class Loop:
    """A ``while`` loop: its head node and how control leaves it without a second iteration."""

    head: int
    guard_nodes: tuple[int, ...]
    exit_route: tuple[tuple[int, bool], ...]
    exit_target: int


@dataclass(frozen=True)
class Cfg:
    method: str
    nodes: tuple[CfgNode, ...]
    edges: tuple[CfgEdge, ...]
    loops: tuple[Loop, ...] = ()

    def __post_init__(self):
        succ: dict[int, list[tuple[int, str]]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            succ[e.src].append((e.dst, e.label))
        order = {"true": 0, "false": 1, "seq": 2}
        for lst in succ.values():
            lst.sort(key=lambda x: order[x[1]])
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_loops", {lp.head: lp for lp in self.loops})

    @property
    def entry(self) -> int:
        return 0

    @property
    def exit(self) -> int:
        return len(self.nodes) - 1

    def node(self, i: int) -> CfgNode:
        return self.nodes[i]

    def succ(self, i: int) -> list[tuple[int, str]]:
        return self._succ[i]

    def loop_at(self, head: int) -> Optional[Loop]:
        return self._loops.get(head)

    def key(self, i: int) -> str:
        return node_key(self.method, i)

    def branch_nodes(self) -> list[CfgNode]:
        return [n for n in self.nodes if n.kind == BRANCH]


def node_key(method: str, i: int) -> str:
    return f"m:{method}/n:{i}"


class _Builder:
    def __init__(self, method: A.MethodDecl, hierarchy):
        self.m = method
        self.h = hierarchy
        self.nodes: list[dict] = []
        self.edges: list[tuple[int, int, str]] = []
        self.returns: list[int] = []
        self.loops: list[tuple[int, tuple[int, ...], list]] = []
        self.temps = 0
        self.types = {p.name: p.type for p in method.params}

    def node(self, kind: str, preds, span=A.NOSPAN, **payload) -> int:
        nid = len(self.nodes)
        self.nodes.append(dict(id=nid, kind=kind, span=span, **payload))
        for p, label in preds:
            self.edges.append((p, nid, label))
        return nid

    # ------------------------------------------------------------- statements
    def block(self, stmts, preds):
        for s in stmts:
            preds = self.stmt(s, preds)
        return preds

    def stmt(self, s, preds):
        if isinstance(s, A.VarDecl):
            init, preds = self.lift(s.init, preds) if s.init is not None else (None, preds)
            self.types[s.name] = s.type
            n = self.node(STATEMENT, preds, s.span, stmt=dataclasses.replace(s, init=init))
            return [(n, "seq")]
        if isinstance(s, A.Assign):
            value, preds = self.lift(s.value, preds)
            n = self.node(STATEMENT, preds, s.span, stmt=dataclasses.replace(s, value=value))
            return [(n, "seq")]
        if isinstance(s, A.ExprStmt):
            expr, preds = self.lift(s.expr, preds)
            if isinstance(expr, A.Temp):
                return preds  # the call node stands for the statement
            n = self.node(STATEMENT, preds, s.span, stmt=dataclasses.replace(s, expr=expr))
            return [(n, "seq")]
        if isinstance(s, A.ReflectSet):
            value, preds = self.lift(s.value, preds)
            n = self.node(STATEMENT, preds, s.span, stmt=dataclasses.replace(s, value=value))
            return [(n, "seq")]
        if isinstance(s, A.Return):
            value, preds = self.lift(s.value, preds) if s.value is not None else (None, preds)
            n = self.node(STATEMENT, preds, s.span, stmt=dataclasses.replace(s, value=value))
            self.returns.append(n)
            return []
        if isinstance(s, A.If):
            t, f = self.cond(s.cond, preds)
            t = self.block(s.then.stmts, t)
            if s.orelse is not None:
                f = self.block(s.orelse.stmts, f)
            return t + f
        if isinstance(s, A.While):
            head = len(self.nodes)
            t, f = self.cond(s.cond, preds)
            self.nodes[head]["loop_head"] = True
            guard_nodes = tuple(range(head, len(self.nodes)))
            for p, label in self.block(s.body.stmts, t):
                self.edges.append((p, head, label))
            self.loops.append((head, guard_nodes, list(f)))
            return f
        raise TypeError(f"unknown statement {type(s).__name__}")

    def cond(self, e, preds):
        if isinstance(e, A.Binary) and e.op == "&&":
            t1, f1 = self.cond(e.left, preds)
            t2, f2 = self.cond(e.right, t1)
            return t2, f1 + f2
        if isinstance(e, A.Binary) and e.op == "||":
            t1, f1 = self.cond(e.left, preds)
            t2, f2 = self.cond(e.right, f1)
            return t1 + t2, f2
        if isinstance(e, A.Unary) and e.op == "!":
            t, f = self.cond(e.operand, preds)
            return f, t
        guard, preds = self.lift(e, preds)
        b = self.node(BRANCH, preds, e.span, guard=guard)
        return [(b, "true")], [(b, "false")]

    # ------------------------------------------------------------- expressions
    def lift(self, e, preds):
        """Hoist every call in ``e`` into call nodes, innermost first, left to right."""
        if isinstance(e, (A.Call, A.ReflectCall)):
            recv = e.receiver
            if recv is not None:
                recv, preds = self.lift(recv, preds)
            args = []
            for a in e.args:
                a, preds = self.lift(a, preds)
                args.append(a)
            call = dataclasses.replace(e, receiver=recv, args=tuple(args))
            temp = f"$t{self.temps}"
            self.temps += 1
            callee, owner, kind = self.classify(e)
            n = self.node(CALL, preds, e.span, call=call, result=temp, callee=callee,
                          callee_owner=owner, call_kind=kind)
            return A.Temp(temp, e.span), [(n, "seq")]
        if isinstance(e, A.Binary):
            left, preds = self.lift(e.left, preds)
            if e.op in ("&&", "||"):
                # the right operand may not run; leave its calls inline
                return dataclasses.replace(e, left=left), preds
            right, preds = self.lift(e.right, preds)
            return dataclasses.replace(e, left=left, right=right), preds
        if isinstance(e, A.Unary):
            operand, preds = self.lift(e.operand, preds)
            return dataclasses.replace(e, operand=operand), preds
        if isinstance(e, A.FieldAccess):
            obj, preds = self.lift(e.obj, preds)
            return dataclasses.replace(e, obj=obj), preds
        return e, preds

    def classify(self, e):
        """(callee signature, static owner, call kind) for a call expression."""
        if isinstance(e, A.ReflectCall):
            m = self._method_on(e.cls, e.name)
            return self._sig(m, e), e.cls, "reflect"
        if e.receiver is None and e.name in A.BUILTINS:
            return A.signature(e.name, A.BUILTINS[e.name][0]), None, "builtin"
        owner = self.m.owner if e.receiver is None else self._static_type(e.receiver)
        m = self._method_on(owner, e.name) if owner is not None else None
        if m is None:
            return self._sig(None, e), owner, "virtual"
        kind = "static" if m.is_static else ("private" if m.access == "private" else "virtual")
        return self._sig(m, e), owner, kind

    def _method_on(self, cls, name):
        if self.h is None or cls is None:
            return None
        return self.h.lookup_method(cls, name)

    @staticmethod
    def _sig(m, e) -> str:
        if m is None:
            return A.signature(e.name, ["?"] * len(e.args))
        types = m.param_types
        return A.signature(m.name, types)

    def _static_type(self, recv) -> Optional[str]:
        if isinstance(recv, A.New):
            return recv.cls
        if isinstance(recv, A.Name):
            if recv.ident in self.types:
                return self.types[recv.ident]
            return recv.ident  # class name for a static call
        return None

    # ------------------------------------------------------------- finish
    def finish(self, final_preds) -> Cfg:
        exit_id = self.node(EXIT, final_preds + [(r, "seq") for r in self.returns])
        keep = _reachable(len(self.nodes), self.edges)
        keep.add(exit_id)
        remap = {old: new for new, old in enumerate(sorted(keep))}
        nodes = []
        for d in self.nodes:
            if d["id"] in remap:
                nodes.append(CfgNode(**{**d, "id": remap[d["id"]]}))
        edges = [CfgEdge(remap[s], remap[t], label) for s, t, label in self.edges
                 if s in remap and t in remap]
        out_edges = {(e.src, e.label): e.dst for e in edges}
        loops = []
        for head, guard_nodes, exits in self.loops:
            if head not in remap:
                continue
            gset = {remap[g] for g in guard_nodes if g in remap}
            exit_set = {(remap[b], label) for b, label in exits if b in remap}
            route = _exit_route(remap[head], gset, exit_set, edges)
            if route is None:
                continue
            obligations, (last, label) = route
            loops.append(Loop(remap[head], tuple(sorted(gset)), obligations,
                              out_edges[(last, label)]))
        return Cfg(self.m.ref, tuple(nodes), tuple(edges), tuple(loops))


def _reachable(n: int, edges) -> set[int]:
    succ: dict[int, list[int]] = {}
    for s, t, _ in edges:
        succ.setdefault(s, []).append(t)
    seen = {0}
    stack = [0]
    while stack:
        for t in succ.get(stack.pop(), ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def _exit_route(head, guard_nodes, exits, edges):
    """Walk the guard nodes from ``head`` to a loop exit, preferring false edges."""
    succ: dict[int, list[CfgEdge]] = {}
    for e in edges:
        succ.setdefault(e.src, []).append(e)
    order = {"false": 0, "true": 1, "seq": 2}

    def walk(node, obls):
        for e in sorted(succ.get(node, ()), key=lambda e: order[e.label]):
            step = obls + ((node, e.label == "true"),) if e.label != "seq" else obls
            if (node, e.label) in exits:
                return step, (node, e.label)
            if e.dst in guard_nodes and e.dst != head:
                found = walk(e.dst, step)
                if found is not None:
                    return found
        return None

    return walk(head, ())


def build_cfg(method: A.MethodDecl, hierarchy=None) -> Cfg:
    """Structured CFG translation of one method body.

    ``hierarchy`` (a Project or TypeFacts) is used to resolve callee signatures;
    without it, calls to user methods get a placeholder signature.
    """
    if method.body is None:
        raise AbstractMethodError(f"{method.ref} has no body")
    b = _Builder(method, hierarchy)
    entry = b.node(ENTRY, [])
    final = b.block(method.body.stmts, [(entry, "seq")])
    return b.finish(final)

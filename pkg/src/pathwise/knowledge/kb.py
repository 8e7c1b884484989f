"""The knowledge base: facts, CFGs, paths, call graph and per-path dependencies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from pathwise.errors import AbstractMethodError, MalformedInput, NoSuchMethod, NotFound, VersionMismatch
from pathwise.knowledge.cfg import CALL, Cfg, CfgEdge, CfgNode, Loop, build_cfg, node_key
from pathwise.knowledge.deps import (Condition, DependentCall, DependentVariable, PathDependencies,
                                     ReturnConstraint, collect_dependencies)
from pathwise.knowledge.facts import ClassFact, FieldFact, MethodFact, TypeFacts, extract_type_facts
from pathwise.knowledge.paths import DEFAULT_PATH_CAP, CfgPath, PathList, enumerate_paths
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.dispatch import resolve_dispatch
from pathwise.subjectlang.project import Project
from pathwise.subjectlang.serial import from_json, to_json

FORMAT_VERSION = 1


@dataclass(frozen=True)
class CallEdge:
    caller: str
    node: int
    callee: str  # signature
    owner: Optional[str]
    kind: str

    @property
    def id(self) -> str:
        return node_key(self.caller, self.node)


@dataclass
class KnowledgeBase:
    facts: TypeFacts
    cfgs: dict[str, Cfg] = field(default_factory=dict)
    paths: dict[str, PathList] = field(default_factory=dict)
    call_graph: list[CallEdge] = field(default_factory=list)
    dependencies: dict[tuple[str, int], PathDependencies] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (self.facts == other.facts and self.cfgs == other.cfgs
                and {k: (list(v), v.truncated) for k, v in self.paths.items()}
                == {k: (list(v), v.truncated) for k, v in other.paths.items()}
                and self.call_graph == other.call_graph and self.dependencies == other.dependencies)

    # ------------------------------------------------------------------ queries
    def method_of(self, sig: str) -> MethodFact:
        """Look a method up by full reference, or by signature when that is unambiguous."""
        if self.facts.has_method(sig):
            return self.facts.method(sig)
        hits = [m for m in self.facts.methods if m.signature == sig]
        if len(hits) != 1:
            raise NotFound(f"method {sig} " + ("is ambiguous" if hits else "not found"))
        return hits[0]

    def cfg_of(self, method: str) -> Cfg:
        ref = self.method_of(method).ref
        if ref not in self.cfgs:
            raise AbstractMethodError(f"{ref} has no body")
        return self.cfgs[ref]

    def paths_of(self, method: str) -> PathList:
        ref = self.method_of(method).ref
        if ref not in self.paths:
            raise AbstractMethodError(f"{ref} has no body")
        return self.paths[ref]

    def deps_of(self, method: str, path) -> PathDependencies:
        ref = self.method_of(method).ref
        index = path.index if isinstance(path, CfgPath) else path
        try:
            return self.dependencies[(ref, index)]
        except KeyError:
            raise NotFound(f"path {index} of {ref}") from None

    def callees_of(self, method: str) -> set[str]:
        ref = self.method_of(method).ref
        return {e.callee for e in self.call_graph if e.caller == ref}

    def callers_of(self, method: str) -> set[str]:
        target = self.method_of(method)
        return {e.caller for e in self.call_graph if self._may_target(e, target)}

    def _may_target(self, edge: CallEdge, target: MethodFact) -> bool:
        if edge.owner is None or edge.callee != target.signature:
            return False
        if edge.kind in ("static", "private", "reflect"):
            m = self.facts.lookup_method(edge.owner, target.name)
            return m is not None and m.ref == target.ref
        # virtual: any concrete receiver at or below the static owner
        for cls in [edge.owner] + self.facts.subclasses(edge.owner):
            try:
                if resolve_dispatch(cls, edge.callee, self.facts).ref == target.ref:
                    return True
            except NoSuchMethod:
                continue
        return False

    def focal_source_of(self, project: Project, method: str) -> str:
        from pathwise.subjectlang.printer import pretty_method
        decl = project.method(self.method_of(method).ref)
        return "\n".join(pretty_method(decl))


def build_kb(project, path_cap: int = DEFAULT_PATH_CAP) -> KnowledgeBase:
    proj = project if isinstance(project, Project) else Project(project)
    facts = extract_type_facts(proj)
    kb = KnowledgeBase(facts)
    for mf in facts.methods:
        decl = proj.method(mf.ref)
        if decl.body is None:
            continue
        cfg = build_cfg(decl, facts)
        kb.cfgs[mf.ref] = cfg
        paths = enumerate_paths(cfg, path_cap)
        kb.paths[mf.ref] = paths
        for n in cfg.nodes:
            if n.kind == CALL:
                kb.call_graph.append(CallEdge(mf.ref, n.id, n.callee, n.callee_owner, n.call_kind))
        for p in paths:
            kb.dependencies[(mf.ref, p.index)] = collect_dependencies(mf, p, cfg, facts)
    return kb


# ---------------------------------------------------------------------- persistence

def _rc_json(rc: Optional[ReturnConstraint]):
    if rc is None:
        return None
    value = to_json(rc.value) if isinstance(rc.value, A.LITERALS) else rc.value
    return {"kind": rc.kind, "value": value, "lo": rc.lo, "hi": rc.hi}


def _rc_load(d) -> Optional[ReturnConstraint]:
    if d is None:
        return None
    value = from_json(d["value"]) if isinstance(d["value"], dict) else d["value"]
    return ReturnConstraint(d["kind"], value, d["lo"], d["hi"])


def kb_to_json(kb: KnowledgeBase) -> dict:
    f = kb.facts
    classes = [{"id": c.name, "superclass": c.superclass, "is_abstract": c.is_abstract,
                "instantiable": c.instantiable, "path": c.path, "line": c.line} for c in f.classes]
    methods = []
    for m in f.methods:
        entry = {"id": m.ref, "owner": m.owner, "name": m.name, "params": [list(p) for p in m.params],
                 "return_type": m.return_type, "access": m.access, "is_static": m.is_static,
                 "is_abstract": m.is_abstract, "path": m.path, "line": m.line,
                 "order": f.methods.index(m)}
        if m.ref in kb.cfgs:
            cfg = kb.cfgs[m.ref]
            entry["loops"] = [{"head": lp.head, "guard_nodes": list(lp.guard_nodes),
                               "exit_route": [list(o) for o in lp.exit_route],
                               "exit_target": lp.exit_target} for lp in cfg.loops]
            entry["paths_truncated"] = kb.paths[m.ref].truncated
        methods.append(entry)
    fields = [{"id": x.ref, "owner": x.owner, "name": x.name, "type": x.type, "access": x.access,
               "is_static": x.is_static, "initializer": x.initializer, "written": x.written,
               "order": i} for i, x in enumerate(f.fields)]
    classes = [dict(c, order=i) for i, c in enumerate(classes)]
    nodes, edges = [], []
    for ref, cfg in kb.cfgs.items():
        for n in cfg.nodes:
            nodes.append({"id": cfg.key(n.id), "method": ref, "index": n.id, "kind": n.kind,
                          "span": [n.span.line, n.span.col], "loop_head": n.loop_head,
                          "stmt": to_json(n.stmt), "guard": to_json(n.guard), "call": to_json(n.call),
                          "result": n.result, "callee": n.callee, "callee_owner": n.callee_owner,
                          "call_kind": n.call_kind})
        for i, e in enumerate(cfg.edges):
            edges.append({"id": f"{cfg.key(e.src)}->{e.dst}:{e.label}", "method": ref, "order": i,
                          "src": e.src, "dst": e.dst, "label": e.label})
    call_edges = [{"id": e.id, "caller": e.caller, "node": e.node, "callee": e.callee,
                   "owner": e.owner, "kind": e.kind} for e in kb.call_graph]
    path_deps = []
    for ref, paths in kb.paths.items():
        for p in paths:
            d = kb.dependencies[(ref, p.index)]
            path_deps.append({
                "id": f"m:{ref}/p:{p.index}", "method": ref, "index": p.index,
                "node_ids": list(p.node_ids), "obligations": [list(o) for o in p.obligations],
                "variables": [{"field": v.field, "owner": v.owner, "name": v.name, "access": v.access,
                               "is_static": v.is_static, "declared_type": v.declared_type,
                               "receiver": v.receiver, "role": v.role} for v in d.variables],
                "calls": [{"node": c.node, "callee": c.callee, "owner": c.owner,
                           "call_kind": c.call_kind, "receiver": to_json(c.receiver),
                           "args": to_json(c.args), "guard": to_json(c.guard), "outcome": c.outcome,
                           "required_return": _rc_json(c.required_return)} for c in d.calls],
                "conditions": [{"node": c.node, "guard": to_json(c.guard), "outcome": c.outcome}
                               for c in d.conditions],
                "hazards": to_json(d.hazards),
                "return_expr": to_json(d.return_expr),
            })
    doc = {"format_version": FORMAT_VERSION}
    for name, arr in (("classes", classes), ("methods", methods), ("fields", fields),
                      ("cfg_nodes", nodes), ("cfg_edges", edges), ("call_edges", call_edges),
                      ("path_deps", path_deps)):
        doc[name] = sorted(arr, key=lambda x: x["id"])
    return doc


def dumps_kb(kb: KnowledgeBase) -> str:
    return json.dumps(kb_to_json(kb), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def save_kb(kb: KnowledgeBase, sink) -> None:
    """Write ``kb`` to a path or a text stream."""
    text = dumps_kb(kb)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_kb(source) -> KnowledgeBase:
    """Read a KB from a path, a text stream, or an already-parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = source.read() if hasattr(source, "read") else open(source, encoding="utf-8").read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise MalformedInput("missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise VersionMismatch(f"format_version {doc['format_version']!r}, expected {FORMAT_VERSION}")
    try:
        return _from_doc(doc)
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise MalformedInput(f"bad knowledge base: {exc!r}") from exc


def _from_doc(doc: dict) -> KnowledgeBase:
    by_order = lambda arr: sorted(arr, key=lambda x: x["order"])  # noqa: E731
    classes = tuple(ClassFact(c["id"], c["superclass"], c["is_abstract"], c["instantiable"],
                              c["path"], c["line"]) for c in by_order(doc["classes"]))
    mdocs = by_order(doc["methods"])
    methods = tuple(MethodFact(m["id"], m["owner"], m["name"], tuple(tuple(p) for p in m["params"]),
                               m["return_type"], m["access"], m["is_static"], m["is_abstract"],
                               m["path"], m["line"]) for m in mdocs)
    fields = tuple(FieldFact(x["owner"], x["name"], x["type"], x["access"], x["is_static"],
                             x["initializer"], x["written"]) for x in by_order(doc["fields"]))
    kb = KnowledgeBase(TypeFacts(classes, methods, fields))
    nodes: dict[str, list] = {}
    for n in doc["cfg_nodes"]:
        nodes.setdefault(n["method"], []).append(n)
    edges: dict[str, list] = {}
    for e in doc["cfg_edges"]:
        edges.setdefault(e["method"], []).append(e)
    for m in mdocs:
        ref = m["id"]
        if "loops" not in m:
            continue
        ns = tuple(CfgNode(n["index"], n["kind"], A.Span(*n["span"]), n["loop_head"],
                           from_json(n["stmt"]), from_json(n["guard"]), from_json(n["call"]),
                           n["result"], n["callee"], n["callee_owner"], n["call_kind"])
                   for n in sorted(nodes.get(ref, []), key=lambda n: n["index"]))
        if [n.id for n in ns] != list(range(len(ns))):
            raise MalformedInput(f"CFG node ids of {ref} are not contiguous")
        es = tuple(CfgEdge(e["src"], e["dst"], e["label"])
                   for e in sorted(edges.get(ref, []), key=lambda e: e["order"]))
        loops = tuple(Loop(lp["head"], tuple(lp["guard_nodes"]),
                           tuple((o[0], o[1]) for o in lp["exit_route"]), lp["exit_target"])
                      for lp in m["loops"])
        kb.cfgs[ref] = Cfg(ref, ns, es, loops)
        kb.paths[ref] = PathList(truncated=m["paths_truncated"])
    midx = {m["id"]: i for i, m in enumerate(mdocs)}
    for e in doc["call_edges"]:
        if e["caller"] not in midx:
            raise MalformedInput(f"call edge from unknown method {e['caller']}")
    for e in sorted(doc["call_edges"], key=lambda e: (midx[e["caller"]], e["node"])):
        kb.call_graph.append(CallEdge(e["caller"], e["node"], e["callee"], e["owner"], e["kind"]))
    for d in sorted(doc["path_deps"], key=lambda d: (d["method"], d["index"])):
        ref = d["method"]
        kb.paths[ref].append(CfgPath(d["index"], tuple(d["node_ids"]),
                                     tuple((o[0], o[1]) for o in d["obligations"]), ref))
        kb.dependencies[(ref, d["index"])] = PathDependencies(
            tuple(DependentVariable(**v) for v in d["variables"]),
            tuple(DependentCall(c["node"], c["callee"], c["owner"], c["call_kind"],
                                from_json(c["receiver"]), from_json(c["args"]), from_json(c["guard"]),
                                c["outcome"], _rc_load(c["required_return"])) for c in d["calls"]),
            tuple(Condition(c["node"], from_json(c["guard"]), c["outcome"]) for c in d["conditions"]),
            from_json(d["hazards"]) or (),
            from_json(d["return_expr"]))
    # restore build order (facts order) for the dict-valued members
    order = {m.ref: i for i, m in enumerate(methods)}
    kb.cfgs = dict(sorted(kb.cfgs.items(), key=lambda kv: order[kv[0]]))
    kb.paths = dict(sorted(kb.paths.items(), key=lambda kv: order[kv[0]]))
    kb.dependencies = dict(sorted(kb.dependencies.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])))
    return kb


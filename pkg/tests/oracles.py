"""Independent reference computations used by the tests.

Nothing here calls the code under test to decide an answer: reachability is
found by running the interpreter on every input, and path sets come from
networkx.
"""

from __future__ import annotations

import itertools

import networkx as nx

from pathwise.subjectlang import ast as A
from pathwise.subjectlang.dispatch import resolve_dispatch
from pathwise.subjectlang.interp import BranchEvent, Interpreter

INTS = list(range(-8, 9))
CHARS = list("AEIOUYBCX")


def strings(project) -> list[str]:
    out = [""] + ["".join(t) for n in (1, 2, 3) for t in itertools.product(CHARS, repeat=n)]
    return out + sorted(set(project.string_constants()) - set(out))


def values(type_name: str, project) -> list:
    if type_name == "int":
        return INTS
    if type_name == "bool":
        return [True, False]
    if type_name == "char":
        return CHARS
    if type_name == "string":
        return strings(project)
    concrete = [c for c in sorted(project.classes)
                if project.is_subclass(c, type_name) and not project.classes[c].is_abstract]
    return [A.New(c) for c in concrete] + [None]


def _assigned_names(project) -> set[str]:
    names = set()
    for cls in project.classes.values():
        for m in cls.methods:
            for node in A.walk(m.body) if m.body is not None else ():
                if isinstance(node, A.Assign):
                    t = node.target
                    names.add(t.ident if isinstance(t, A.Name) else t.name)
                elif isinstance(node, A.ReflectSet):
                    names.add(node.name)
    return names


def mutable_fields(project, cls: str | None, owner: str) -> tuple[list, list]:
    """(static, instance) int/bool/char fields that are not constants, as (owner, name, type)."""
    assigned = _assigned_names(project)

    def keep(f):
        if f.declared_type not in ("int", "bool", "char"):
            return False
        return not (f.is_static and f.initializer is not None and f.name not in assigned)

    statics = [(c, f.name, f.declared_type) for c in project.chain(owner)
               for f in project.classes[c].fields if f.is_static and keep(f)]
    instance = [] if cls is None else [(o, f.name, f.declared_type) for o, f in project.instance_fields(cls)
                                      if keep(f)]
    return statics, instance


def receivers(project, method: A.MethodDecl) -> list:
    if method.is_static:
        return [None]
    pool = [c for c in sorted(project.classes)
            if project.is_subclass(c, method.owner) and not project.classes[c].is_abstract]
    if method.access == "private":
        return pool
    return [c for c in pool if resolve_dispatch(c, method.signature, project).ref == method.ref]


def reachable_outcomes(project, ref: str) -> set:
    """Every (span, outcome) of ``ref``'s guards reached by some input in the domains."""
    method = project.method(ref)
    interp = Interpreter(project, focal=ref, record_statements=False)
    arg_domains = [values(p.type, project) for p in method.params]
    seen = set()
    for recv in receivers(project, method):
        statics, instance = mutable_fields(project, recv, method.owner)
        fields = statics + instance
        for state in itertools.product(*[values(t, project) for _, _, t in fields]):
            s = {(o, n): v for (o, n, _), v in zip(statics, state[:len(statics)])}
            i = {(o, n): v for (o, n, _), v in zip(instance, state[len(statics):])}
            for args in itertools.product(*arg_domains):
                trace = interp.invoke(ref, args, recv, s, i)
                seen.update((ev.span, ev.outcome) for ev in trace.events
                            if isinstance(ev, BranchEvent) and ev.method == ref)
    return seen


def domain_inputs(project, method: A.MethodDecl):
    return itertools.product(*[values(p.type, project) for p in method.params])


def simple_paths(cfg) -> set[tuple[int, ...]]:
    """All simple entry-to-exit paths of a CFG, ignoring edge labels."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(n.id for n in cfg.nodes)
    g.add_edges_from((e.src, e.dst) for e in cfg.edges)
    return {tuple(p) for p in nx.all_simple_paths(g, cfg.entry, cfg.exit)} | (
        {(cfg.entry,)} if cfg.entry == cfg.exit else set())


def random_method_source(rng, max_loops: int = 3) -> str:
    """A random structured method over ``int x`` built from assignments, ifs and whiles."""
    loops = [0]

    def guard():
        k = rng.randint(-3, 3)
        op = rng.choice(["<", ">", "==", "!=", "<=", ">="])
        atom = f"x {op} {k}"
        if rng.random() < 0.2:
            atom = f"{atom} {rng.choice(['&&', '||'])} x != {rng.randint(-3, 3)}"
        return atom

    def block(depth: int) -> list[str]:
        out = []
        for _ in range(rng.randint(0, 2)):
            r = rng.random()
            if depth < 2 and r < 0.3:
                body = block(depth + 1)
                other = block(depth + 1) if rng.random() < 0.5 else None
                out.append(f"if ({guard()}) {{ {' '.join(body)} }}" + (f" else {{ {' '.join(other)} }}" if other is not None else ""))
            elif depth < 2 and r < 0.5 and loops[0] < max_loops:
                loops[0] += 1
                out.append(f"while ({guard()}) {{ {' '.join(block(depth + 1))} x = x + 1; }}")
            elif r < 0.6 and depth > 0:
                out.append("return x;")
                break
            else:
                out.append(f"x = x + {rng.randint(1, 3)};")
        return out

    return f"class R {{ public static int f(int x) {{ {' '.join(block(0))} return x; }} }}"

"""Type facts: classes, method signatures, fields, access modifiers, hierarchy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from pathwise.errors import NotFound
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.project import Project


@dataclass(frozen=True)
class ClassFact:
    name: str
    superclass: Optional[str]
    is_abstract: bool
    instantiable: bool
    path: str = ""
    line: int = 0


@dataclass(frozen=True)
class MethodFact:
    ref: str
    owner: str
    name: str
    params: tuple[tuple[str, str], ...]  # (name, type)
    return_type: str
    access: str
    is_static: bool
    is_abstract: bool
    path: str = ""
    line: int = 0

    @property
    def signature(self) -> str:
        return A.signature(self.name, self.param_types)

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(t for _, t in self.params)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)


@dataclass(frozen=True)
class FieldFact:
    owner: str
    name: str
    type: str
    access: str
    is_static: bool
    initializer: object = None  # literal value, or None when absent
    written: bool = False  # assigned anywhere in the project

    @property
    def ref(self) -> str:
        return f"{self.owner}.{self.name}"

    @property
    def is_constant(self) -> bool:
        """Static, initialised, and never assigned: its value is known statically."""
        return self.is_static and self.initializer is not None and not self.written


@dataclass(frozen=True)
class TypeFacts:
    classes: tuple[ClassFact, ...] = ()
    methods: tuple[MethodFact, ...] = ()
    fields: tuple[FieldFact, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_cls", {c.name: c for c in self.classes})
        object.__setattr__(self, "_meth", {m.ref: m for m in self.methods})
        object.__setattr__(self, "_fld", {(f.owner, f.name): f for f in self.fields})

    # hierarchy protocol used by resolve_dispatch
    def superclass_of(self, name: str) -> Optional[str]:
        c = self._cls.get(name)
        return c.superclass if c is not None and c.superclass in self._cls else None

    def declares(self, cls: str, sig: str) -> Optional[MethodFact]:
        return self._meth.get(f"{cls}#{sig}")

    def cls(self, name: str) -> ClassFact:
        try:
            return self._cls[name]
        except KeyError:
            raise NotFound(f"class {name}") from None

    def has_class(self, name: str) -> bool:
        return name in self._cls

    def method(self, ref: str) -> MethodFact:
        try:
            return self._meth[ref]
        except KeyError:
            raise NotFound(f"method {ref}") from None

    def has_method(self, ref: str) -> bool:
        return ref in self._meth

    def field(self, owner: str, name: str) -> FieldFact:
        try:
            return self._fld[(owner, name)]
        except KeyError:
            raise NotFound(f"field {owner}.{name}") from None

    def chain(self, name: str) -> list[str]:
        out = []
        cur = name
        while cur is not None and cur in self._cls and cur not in out:
            out.append(cur)
            cur = self._cls[cur].superclass
        return out

    def field_owner(self, cls: str, name: str) -> Optional[str]:
        for c in self.chain(cls):
            if (c, name) in self._fld:
                return c
        return None

    def lookup_method(self, cls: str, name: str) -> Optional[MethodFact]:
        """First method called ``name`` on the chain of ``cls`` (names are unique per class)."""
        for c in self.chain(cls):
            for m in self.methods:
                if m.owner == c and m.name == name:
                    return m
        return None

    def subclasses(self, name: str) -> list[str]:
        return sorted(c.name for c in self.classes if c.name != name and name in self.chain(c.name))

    def concrete_subclasses(self, name: str) -> list[str]:
        return [c for c in self.subclasses(name) if self._cls[c].instantiable]


def written_fields(project: Project) -> set[tuple[str, str]]:
    written = set()
    by_name: dict[str, list[tuple[str, str]]] = {}
    for cname, cls in project.classes.items():
        for f in cls.fields:
            by_name.setdefault(f.name, []).append((cname, f.name))
    for cname, cls in project.classes.items():
        for m in cls.methods:
            if m.body is None:
                continue
            locals_ = {p.name for p in m.params}
            for node in A.walk(m.body):
                if isinstance(node, A.VarDecl):
                    locals_.add(node.name)
                elif isinstance(node, A.Assign):
                    t = node.target
                    if isinstance(t, A.Name) and t.ident not in locals_:
                        owner = project.field_owner(cname, t.ident)
                        if owner is not None:
                            written.add((owner, t.ident))
                    elif isinstance(t, A.FieldAccess):
                        # receiver type is not tracked here; be conservative
                        written.update(by_name.get(t.name, ()))
                elif isinstance(node, A.ReflectSet):
                    owner = project.field_owner(node.cls, node.name)
                    if owner is not None:
                        written.add((owner, node.name))
    return written


def extract_type_facts(project) -> TypeFacts:
    """One fact per class, method and field, ordered by (file, position)."""
    proj = project if isinstance(project, Project) else Project(project)
    written = written_fields(proj)
    decls = sorted(proj.classes.values(),
                   key=lambda c: (proj.unit_of[c.name].path, c.span.line, c.span.col, c.name))
    classes, methods, fields = [], [], []
    for c in decls:
        path = proj.unit_of[c.name].path
        classes.append(ClassFact(c.name, c.superclass, c.is_abstract, not c.is_abstract, path, c.span.line))
        for f in c.fields:
            init = f.initializer.value if f.initializer is not None else None
            fields.append(FieldFact(c.name, f.name, f.declared_type, f.access, f.is_static, init,
                                    (c.name, f.name) in written))
        for m in c.methods:
            methods.append(MethodFact(m.ref, c.name, m.name, tuple((p.name, p.type) for p in m.params),
                                      m.return_type, m.access, m.is_static, m.is_abstract,
                                      path, m.span.line))
    return TypeFacts(tuple(classes), tuple(methods), tuple(fields))

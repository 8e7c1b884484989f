"""Project-wide class index shared by the checker and the interpreter."""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Optional

from pathwise.subjectlang import ast as A


class Project:
    """A set of source units with name lookups over the class hierarchy.

    Duplicate class names keep the first declaration; the checker reports the rest.
    """

    def __init__(self, units: Iterable[A.SourceUnit]):
        self.units: tuple[A.SourceUnit, ...] = tuple(units)
        self.classes: dict[str, A.ClassDecl] = {}
        self.unit_of: dict[str, A.SourceUnit] = {}
        for unit in self.units:
            for cls in unit.classes:
                if cls.name not in self.classes:
                    self.classes[cls.name] = cls
                    self.unit_of[cls.name] = unit

    def with_unit(self, unit: A.SourceUnit) -> "Project":
        return Project(self.units + (unit,))

    def superclass_of(self, name: str) -> Optional[str]:
        cls = self.classes.get(name)
        if cls is None or cls.superclass not in self.classes:
            return None
        return cls.superclass

    def chain(self, name: str) -> list[str]:
        """``name`` and its superclasses, lowest first. Stops on cycles."""
        out: list[str] = []
        cur: Optional[str] = name
        while cur is not None and cur in self.classes and cur not in out:
            out.append(cur)
            cur = self.classes[cur].superclass
        return out

    def is_subclass(self, sub: str, sup: str) -> bool:
        return sup in self.chain(sub)

    def declares(self, cls: str, sig: str) -> Optional[A.MethodDecl]:
        decl = self.classes.get(cls)
        if decl is None:
            return None
        for m in decl.methods:
            if m.signature == sig:
                return m
        return None

    def lookup_method(self, cls: str, name: str) -> Optional[A.MethodDecl]:
        for c in self.chain(cls):
            m = self.classes[c].method(name)
            if m is not None:
                return m
        return None

    def lookup_field(self, cls: str, name: str) -> Optional[A.FieldDecl]:
        for c in self.chain(cls):
            f = self.classes[c].field(name)
            if f is not None:
                return f
        return None

    def field_owner(self, cls: str, name: str) -> Optional[str]:
        for c in self.chain(cls):
            if self.classes[c].field(name) is not None:
                return c
        return None

    def instance_fields(self, cls: str) -> list[tuple[str, A.FieldDecl]]:
        """(owner, decl) for every instance field, superclass fields first."""
        out = []
        for c in reversed(self.chain(cls)):
            out.extend((c, f) for f in self.classes[c].fields if not f.is_static)
        return out

    def subclasses(self, name: str) -> list[str]:
        """Transitive subclasses of ``name`` (excluding itself), sorted by name."""
        return sorted(c for c in self.classes if c != name and self.is_subclass(c, name))

    @cached_property
    def methods(self) -> dict[str, A.MethodDecl]:
        return {m.ref: m for c in self.classes.values() for m in c.methods}

    def method(self, ref: str) -> Optional[A.MethodDecl]:
        return self.methods.get(ref)

    def string_constants(self) -> list[str]:
        """Every string literal in the project, deduplicated, in sorted order."""
        seen = set()
        for unit in self.units:
            for cls in unit.classes:
                for f in cls.fields:
                    if isinstance(f.initializer, A.StrLit):
                        seen.add(f.initializer.value)
                for m in cls.methods:
                    if m.body is None:
                        continue
                    for node in A.walk(m.body):
                        if isinstance(node, A.StrLit):
                            seen.add(node.value)
        return sorted(seen)

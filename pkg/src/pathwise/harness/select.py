"""Choosing which methods get tests."""

from __future__ import annotations

from pathwise.errors import ConfigError, NotFound
from pathwise.knowledge.cfg import BRANCH


def has_dependencies(kb, ref: str) -> bool:
    """True when some path of ``ref`` reads a field or branches on a call result."""
    return any(d.variables or d.calls for (r, _), d in kb.dependencies.items() if r == ref)


def select_focals(kb, focal_filter="branching-and-dependent") -> list[str]:
    """Method references to test, in source order (explicit lists keep their own order).

    The default keeps methods with at least one branch whose paths depend on a
    field or on another method's return value.
    """
    if not isinstance(focal_filter, str):
        out = []
        for name in focal_filter:
            try:
                out.append(kb.method_of(name).ref)
            except NotFound as exc:
                raise ConfigError(f"focal method {name!r} not found") from exc
        return out
    refs = [m.ref for m in kb.facts.methods if m.ref in kb.cfgs]
    if focal_filter == "all":
        return refs
    return [r for r in refs
            if any(n.kind == BRANCH for n in kb.cfgs[r].nodes) and has_dependencies(kb, r)]

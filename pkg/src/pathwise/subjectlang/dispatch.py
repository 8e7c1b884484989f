from __future__ import annotations

from typing import Optional, Protocol

from pathwise.errors import NoSuchMethod


class Hierarchy(Protocol):
    def superclass_of(self, name: str) -> Optional[str]: ...

    def declares(self, cls: str, sig: str): ...


def resolve_dispatch(runtime_class: str, signature: str, hierarchy: Hierarchy):
    """Walk upward from ``runtime_class``; the first class declaring ``signature`` wins.

    Works over anything exposing ``superclass_of`` and ``declares`` (a
    :class:`~pathwise.subjectlang.project.Project` or the knowledge base's type
    facts). Raises :class:`NoSuchMethod` when nothing on the chain matches.
    """
    seen = set()
    cur: Optional[str] = runtime_class
    while cur is not None and cur not in seen:
        seen.add(cur)
        found = hierarchy.declares(cur, signature)
        if found is not None:
            return found
        cur = hierarchy.superclass_of(cur)
    raise NoSuchMethod(f"{signature} not found on the chain of {runtime_class}")

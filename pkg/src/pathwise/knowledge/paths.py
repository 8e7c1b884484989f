"""Loop-once path enumeration over a CFG.

Paths are produced by depth-first search taking the true edge before the false
edge. A walk never revisits a node. When the only way forward is the back
edge into a loop head already on the walk, the walk leaves the loop instead:
the guard outcomes that exit the loop are appended as obligations and the walk
continues at the loop's exit target. Each loop body therefore contributes at
most one iteration, and the loop-exit evaluation stays visible in the
obligation list, as it is in an execution trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from pathwise.knowledge.cfg import BRANCH, STATEMENT, Cfg

DEFAULT_PATH_CAP = 256


@dataclass(frozen=True)
class CfgPath:
    index: int
    node_ids: tuple[int, ...]
    obligations: tuple[tuple[int, bool], ...]
    method: str = ""

    def statement_count(self, cfg: Cfg) -> int:
        return sum(1 for n in self.node_ids if cfg.node(n).kind == STATEMENT)


class PathList(list):
    """A list of paths that also remembers whether the cap cut enumeration short."""

    def __init__(self, paths=(), truncated: bool = False):
        super().__init__(paths)
        self.truncated = truncated


def leave_loop(cfg: Cfg, head: int, on_path: set) -> Optional[tuple[int, tuple]]:
    """Exit target and extra obligations when a back edge reaches ``head``."""
    extra: tuple = ()
    seen = set()
    while True:
        loop = cfg.loop_at(head)
        if loop is None or head in seen:
            return None
        seen.add(head)
        extra += loop.exit_route
        if loop.exit_target not in on_path:
            return loop.exit_target, extra
        head = loop.exit_target  # an enclosing loop's head: leave that one too


def enumerate_paths(cfg: Cfg, cap: int = DEFAULT_PATH_CAP) -> PathList:
    out = PathList()
    exit_id = cfg.exit
    nodes: list[int] = []
    obls: list[tuple[int, bool]] = []
    on_path: set[int] = set()

    def visit(n: int) -> bool:
        """Returns False once the cap is hit."""
        nodes.append(n)
        on_path.add(n)
        try:
            if n == exit_id:
                if len(out) >= cap:
                    out.truncated = True
                    return False
                out.append(CfgPath(len(out), tuple(nodes), tuple(obls), cfg.method))
                return True
            is_branch = cfg.node(n).kind == BRANCH
            for dst, label in cfg.succ(n):
                pushed = 0
                if is_branch:
                    obls.append((n, label == "true"))
                    pushed = 1
                target = dst
                if dst in on_path:
                    left = leave_loop(cfg, dst, on_path)
                    if left is None:
                        del obls[len(obls) - pushed:]
                        continue
                    target, extra = left
                    obls.extend(extra)
                    pushed += len(extra)
                ok = visit(target)
                del obls[len(obls) - pushed:]
                if not ok:
                    return False
            return True
        finally:
            nodes.pop()
            on_path.discard(n)

    visit(cfg.entry)
    return out


def path_problems(cfg: Cfg, path: CfgPath) -> list[str]:
    """Structural problems with ``path``; empty when it is a valid loop-once walk."""
    problems = []
    ids = path.node_ids
    if not ids or ids[0] != cfg.entry or ids[-1] != cfg.exit:
        problems.append("path must run from entry to exit")
    if len(set(ids)) != len(ids):
        problems.append("a node repeats")
    expected: list[tuple[int, bool]] = []
    for i, (u, v) in enumerate(zip(ids, ids[1:])):
        labels = [label for dst, label in cfg.succ(u) if dst == v]
        extra: tuple = ()
        if not labels:
            # a back edge into a loop head on the path, followed by that loop's exit
            for dst, label in cfg.succ(u):
                if dst in ids[:i + 1]:
                    left = leave_loop(cfg, dst, set(ids[:i + 1]))
                    if left is not None and left[0] == v:
                        labels, extra = [label], left[1]
                        break
        if not labels:
            problems.append(f"no edge {u}->{v}")
            continue
        if cfg.node(u).kind == BRANCH:
            taken = [(u, label == "true") for label in labels]
            nxt = len(expected)
            want = path.obligations[nxt] if nxt < len(path.obligations) else None
            expected.append(want if want in taken else taken[0])
        expected.extend(extra)
    if tuple(expected) != path.obligations:
        problems.append("obligations do not match the traversed edge labels")
    return problems

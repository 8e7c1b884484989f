"""Structural JSON encoding of AST nodes (used by the knowledge-base file format)."""

from __future__ import annotations

import dataclasses

from pathwise.errors import MalformedInput
from pathwise.subjectlang import ast as A

_NODES = {cls.__name__: cls for cls in (
    A.IntLit, A.BoolLit, A.CharLit, A.StrLit, A.NullLit, A.Name, A.FieldAccess, A.Binary,
    A.Unary, A.Call, A.ReflectCall, A.New, A.Temp, A.Block, A.VarDecl, A.Assign, A.If,
    A.While, A.Return, A.ExprStmt, A.ReflectSet, A.Param, A.FieldDecl, A.MethodDecl, A.ClassDecl,
    A.SourceUnit)}


def to_json(node):
    """Encode a node as nested dicts; ``None`` stays ``None``."""
    if node is None:
        return None
    if isinstance(node, tuple):
        return [to_json(n) for n in node]
    if isinstance(node, A.Span):
        return [node.line, node.col]
    if not dataclasses.is_dataclass(node):
        return node
    out = {"k": type(node).__name__}
    for f in dataclasses.fields(node):
        out[f.name] = to_json(getattr(node, f.name))
    return out


def from_json(data):
    if data is None or isinstance(data, (str, int, float, bool)):
        return data
    if isinstance(data, list):
        return tuple(from_json(d) for d in data)
    if not isinstance(data, dict) or data.get("k") not in _NODES:
        raise MalformedInput(f"not an AST node: {data!r:.80}")
    cls = _NODES[data["k"]]
    kwargs = {}
    try:
        for f in dataclasses.fields(cls):
            raw = data[f.name]
            if f.name == "span":
                kwargs[f.name] = A.Span(*raw)
            else:
                kwargs[f.name] = from_json(raw)
        return cls(**kwargs)
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad {cls.__name__} node: {exc}") from exc

"""Canonical pretty-printer; its output is the normal form used in golden files."""

from __future__ import annotations

from pathwise.subjectlang import ast as A
from pathwise.subjectlang.lexer import escape

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7
_INDENT = "    "


def expr_prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY_PREC
    if isinstance(e, A.IntLit) and e.value < 0:
        return _UNARY_PREC
    return 8


def pretty_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.CharLit):
        return "'" + escape(e.value) + "'"
    if isinstance(e, A.StrLit):
        return '"' + escape(e.value) + '"'
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, (A.Name, A.Temp)):
        return e.ident if isinstance(e, A.Name) else e.name
    if isinstance(e, A.New):
        return f"new {e.cls}()"
    if isinstance(e, A.FieldAccess):
        return f"{_postfix_operand(e.obj)}.{e.name}"
    if isinstance(e, A.Call):
        args = ", ".join(pretty_expr(a) for a in e.args)
        prefix = "" if e.receiver is None else _postfix_operand(e.receiver) + "."
        return f"{prefix}{e.name}({args})"
    if isinstance(e, A.ReflectCall):
        args = ", ".join(pretty_expr(a) for a in e.args)
        return f"reflect call {_reflect_target(e.receiver, e.cls, e.name)}({args})"
    if isinstance(e, A.Unary):
        inner = pretty_expr(e.operand)
        if expr_prec(e.operand) < _UNARY_PREC or (e.op == "-" and inner.startswith("-")):
            inner = f"({inner})"
        return e.op + inner
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        left = pretty_expr(e.left)
        if expr_prec(e.left) < p:
            left = f"({left})"
        right = pretty_expr(e.right)
        if expr_prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _postfix_operand(e: A.Expr) -> str:
    text = pretty_expr(e)
    return text if expr_prec(e) >= 8 and not isinstance(e, A.ReflectCall) else f"({text})"


def _reflect_target(receiver, cls: str, name: str) -> str:
    if receiver is None:
        return f"{cls}#{name}"
    return f"{_postfix_operand(receiver)}.{cls}#{name}"


def pretty_stmt(s: A.Stmt, depth: int = 0) -> list[str]:
    pad = _INDENT * depth
    if isinstance(s, A.VarDecl):
        init = "" if s.init is None else " = " + pretty_expr(s.init)
        return [f"{pad}{s.type} {s.name}{init};"]
    if isinstance(s, A.Assign):
        return [f"{pad}{pretty_expr(s.target)} = {pretty_expr(s.value)};"]
    if isinstance(s, A.Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {pretty_expr(s.value)};"]
    if isinstance(s, A.ExprStmt):
        return [f"{pad}{pretty_expr(s.expr)};"]
    if isinstance(s, A.ReflectSet):
        return [f"{pad}reflect set {_reflect_target(s.receiver, s.cls, s.name)} = {pretty_expr(s.value)};"]
    if isinstance(s, A.While):
        return [f"{pad}while ({pretty_expr(s.cond)}) {{", *_block_body(s.body, depth), f"{pad}}}"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({pretty_expr(s.cond)}) {{", *_block_body(s.then, depth)]
        orelse = s.orelse
        while orelse is not None:
            if len(orelse.stmts) == 1 and isinstance(orelse.stmts[0], A.If):
                nested = orelse.stmts[0]
                lines.append(f"{pad}}} else if ({pretty_expr(nested.cond)}) {{")
                lines.extend(_block_body(nested.then, depth))
                orelse = nested.orelse
            else:
                lines.append(f"{pad}}} else {{")
                lines.extend(_block_body(orelse, depth))
                orelse = None
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement: {s!r}")


def _block_body(block: A.Block, depth: int) -> list[str]:
    out = []
    for s in block.stmts:
        out.extend(pretty_stmt(s, depth + 1))
    return out


def pretty_method(m: A.MethodDecl, depth: int = 1) -> list[str]:
    pad = _INDENT * depth
    mods = [m.access] + (["static"] if m.is_static else []) + (["abstract"] if m.is_abstract else [])
    params = ", ".join(f"{p.type} {p.name}" for p in m.params)
    head = f"{pad}{' '.join(mods)} {m.return_type} {m.name}({params})"
    if m.body is None:
        return [head + ";"]
    return [head + " {", *_block_body(m.body, depth), f"{pad}}}"]


def pretty_field(f: A.FieldDecl, depth: int = 1) -> str:
    mods = [f.access] + (["static"] if f.is_static else [])
    init = "" if f.initializer is None else " = " + pretty_expr(f.initializer)
    return f"{_INDENT * depth}{' '.join(mods)} {f.declared_type} {f.name}{init};"


def pretty_class(c: A.ClassDecl) -> list[str]:
    head = ("abstract " if c.is_abstract else "") + f"class {c.name}"
    if c.superclass:
        head += f" extends {c.superclass}"
    lines = [head + " {"]
    lines.extend(pretty_field(f) for f in c.fields)
    for i, m in enumerate(c.methods):
        if i or c.fields:
            lines.append("")
        lines.extend(pretty_method(m))
    lines.append("}")
    return lines


def pretty(unit: A.SourceUnit) -> str:
    chunks = ["\n".join(pretty_class(c)) for c in unit.classes]
    return "\n\n".join(chunks) + ("\n" if chunks else "")

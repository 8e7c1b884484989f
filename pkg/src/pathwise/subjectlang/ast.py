"""Abstract syntax tree for the subject language.

Every node is a frozen dataclass. Source spans ride along on each node but are
excluded from equality, so two trees compare equal when they have the same
shape regardless of where they came from (this is what the pretty-print
round trip relies on).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

PRIMITIVE_TYPES = ("int", "bool", "char", "string")
RETURN_TYPES = PRIMITIVE_TYPES + ("void",)
BUILTINS = {
    # name: (param types, return type)
    "length": (("string",), "int"),
    "charAt": (("string", "int"), "char"),
    "indexOf": (("string", "char"), "int"),
    "substring": (("string", "int", "int"), "string"),
    "concat": (("string", "string"), "string"),
}


@dataclass(frozen=True, slots=True, order=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOSPAN = Span(0, 0)


def _span():
    return field(default=NOSPAN, compare=False, repr=False)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class CharLit:
    value: str
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class StrLit:
    value: str
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class NullLit:
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Name:
    ident: str
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class FieldAccess:
    obj: "Expr"
    name: str
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Unary:
    op: str
    operand: "Expr"
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Call:
    """Direct call. ``receiver`` is None for unqualified calls (own class or built-in)."""

    receiver: Optional["Expr"]
    name: str
    args: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class ReflectCall:
    """``reflect call recv.Cls#name(args)``; receiver is None for static targets."""

    receiver: Optional["Expr"]
    cls: str
    name: str
    args: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class New:
    cls: str
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Temp:
    """Synthetic variable holding a call result lifted into its own CFG node."""

    name: str
    span: Span = _span()


Expr = Union[IntLit, BoolLit, CharLit, StrLit, NullLit, Name, FieldAccess, Binary,
             Unary, Call, ReflectCall, New, Temp]
LITERALS = (IntLit, BoolLit, CharLit, StrLit, NullLit)


# ----------------------------------------------------------------- statements


@dataclass(frozen=True, slots=True)
class Block:
    stmts: tuple["Stmt", ...]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class VarDecl:
    type: str
    name: str
    init: Optional[Expr]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Assign:
    target: Expr  # Name or FieldAccess
    value: Expr
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class While:
    cond: Expr
    body: Block
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Return:
    value: Optional[Expr]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class ExprStmt:
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class ReflectSet:
    receiver: Optional[Expr]
    cls: str
    name: str
    value: Expr
    span: Span = _span()


Stmt = Union[VarDecl, Assign, If, While, Return, ExprStmt, ReflectSet]


# --------------------------------------------------------------- declarations


@dataclass(frozen=True, slots=True)
class Param:
    type: str
    name: str


@dataclass(frozen=True, slots=True)
class FieldDecl:
    name: str
    declared_type: str
    is_static: bool
    access: str
    initializer: Optional[Expr]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class MethodDecl:
    owner: str
    name: str
    params: tuple[Param, ...]
    return_type: str
    is_static: bool
    is_abstract: bool
    access: str
    body: Optional[Block]
    span: Span = _span()

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(p.type for p in self.params)

    @property
    def signature(self) -> str:
        return signature(self.name, self.param_types)

    @property
    def ref(self) -> str:
        return method_ref(self.owner, self.name, self.param_types)


@dataclass(frozen=True, slots=True)
class ClassDecl:
    name: str
    superclass: Optional[str]
    is_abstract: bool
    fields: tuple[FieldDecl, ...]
    methods: tuple[MethodDecl, ...]
    span: Span = _span()

    def method(self, name: str) -> Optional[MethodDecl]:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def field(self, name: str) -> Optional[FieldDecl]:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass(frozen=True, slots=True)
class SourceUnit:
    path: str
    classes: tuple[ClassDecl, ...]


def signature(name: str, param_types) -> str:
    return f"{name}({','.join(param_types)})"


def method_ref(owner: str, name: str, param_types) -> str:
    return f"{owner}#{signature(name, param_types)}"


def split_ref(ref: str) -> tuple[str, str]:
    """``'A#m(int)'`` -> ``('A', 'm(int)')``."""
    owner, _, sig = ref.partition("#")
    return owner, sig


def sig_name(sig: str) -> str:
    return sig.split("(", 1)[0]


def default_value(type_name: str):
    """Type default used for uninitialised fields and locals."""
    return {"int": 0, "bool": False, "char": "\0", "string": ""}.get(type_name)


def children(node) -> tuple:
    """Direct child nodes of an expression or statement, in evaluation order."""
    if isinstance(node, (FieldAccess,)):
        return (node.obj,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, (Call, ReflectCall)):
        return ((node.receiver,) if node.receiver is not None else ()) + node.args
    if isinstance(node, VarDecl):
        return (node.init,) if node.init is not None else ()
    if isinstance(node, Assign):
        return (node.target, node.value)
    if isinstance(node, If):
        return (node.cond, node.then) + ((node.orelse,) if node.orelse else ())
    if isinstance(node, While):
        return (node.cond, node.body)
    if isinstance(node, Return):
        return (node.value,) if node.value is not None else ()
    if isinstance(node, ExprStmt):
        return (node.expr,)
    if isinstance(node, ReflectSet):
        return ((node.receiver,) if node.receiver is not None else ()) + (node.value,)
    if isinstance(node, Block):
        return node.stmts
    return ()


def walk(node):
    """Preorder traversal over a statement/expression subtree."""
    yield node
    for child in children(node):
        yield from walk(child)


def guard_atoms(cond) -> list:
    """Atomic conditions of a guard, left to right, looking through ``&&``, ``||`` and ``!``."""
    if isinstance(cond, Binary) and cond.op in ("&&", "||"):
        return guard_atoms(cond.left) + guard_atoms(cond.right)
    if isinstance(cond, Unary) and cond.op == "!":
        return guard_atoms(cond.operand)
    return [cond]


def statements(block) -> list:
    """Every statement in a block, nested ones included, in source order."""
    out = []
    for s in block.stmts:
        out.append(s)
        if isinstance(s, If):
            out.extend(statements(s.then))
            if s.orelse is not None:
                out.extend(statements(s.orelse))
        elif isinstance(s, While):
            out.extend(statements(s.body))
    return out

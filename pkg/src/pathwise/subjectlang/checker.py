"""Static semantics: name resolution, typing, access control, abstract rules, returns."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from pathwise.subjectlang import ast as A
from pathwise.subjectlang.diagnostics import Diagnostic, error, sort_diagnostics
from pathwise.subjectlang.project import Project

_ARITH = ("+", "-", "*", "/", "%")
_ORDER = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class ClassRef:
    """Type of a bare class name used as the receiver of a static access."""

    name: str


def check(project: Iterable[A.SourceUnit] | Project) -> list[Diagnostic]:
    """Return every diagnostic for the project, ordered by (file, span). Empty iff well-typed."""
    proj = project if isinstance(project, Project) else Project(project)
    return sort_diagnostics(_Checker(proj).run())


class _Checker:
    def __init__(self, project: Project):
        self.p = project
        self.diags: list[Diagnostic] = []
        self.path = ""

    def err(self, span: A.Span, code: str, message: str):
        self.diags.append(error(span, code, message, self.path))

    # ------------------------------------------------------------ structure
    def run(self) -> list[Diagnostic]:
        seen: dict[str, str] = {}
        for unit in self.p.units:
            self.path = unit.path
            for cls in unit.classes:
                if cls.name in seen:
                    self.err(cls.span, "DUPLICATE_CLASS", f"class {cls.name} already declared in {seen[cls.name]}")
                else:
                    seen[cls.name] = unit.path
        for unit in self.p.units:
            self.path = unit.path
            for cls in unit.classes:
                if self.p.classes.get(cls.name) is cls:
                    self.check_class(cls)
        return self.diags

    def valid_type(self, t: str, allow_void: bool = False) -> bool:
        return t in A.PRIMITIVE_TYPES or (allow_void and t == "void") or t in self.p.classes

    def check_class(self, cls: A.ClassDecl):
        if cls.superclass is not None:
            if cls.superclass not in self.p.classes:
                self.err(cls.span, "UNKNOWN_CLASS", f"unknown superclass {cls.superclass}")
            elif cls.name in self.p.chain(cls.superclass):
                self.err(cls.span, "CYCLIC_INHERITANCE", f"inheritance cycle through {cls.name}")
                return
        names: set[str] = set()
        for f in cls.fields:
            if f.name in names:
                self.err(f.span, "DUPLICATE_MEMBER", f"duplicate member {f.name}")
            names.add(f.name)
            if f.declared_type not in A.PRIMITIVE_TYPES:
                self.err(f.span, "INVALID_TYPE", f"field type must be primitive, not {f.declared_type}")
            elif f.initializer is not None:
                t = self.literal_type(f.initializer)
                if t is None:
                    self.err(f.span, "TYPE_MISMATCH", "field initializer must be a constant")
                elif t != f.declared_type:
                    self.err(f.initializer.span, "TYPE_MISMATCH",
                             f"cannot initialize {f.declared_type} field {f.name} with {t}")
        for m in cls.methods:
            if m.name in names:
                self.err(m.span, "DUPLICATE_MEMBER", f"duplicate member {m.name}")
            names.add(m.name)
            self.check_method_header(cls, m)
        self.check_abstract_coverage(cls)
        for m in cls.methods:
            if m.body is not None:
                _MethodChecker(self, cls, m).run()

    @staticmethod
    def literal_type(e: A.Expr) -> Optional[str]:
        return {A.IntLit: "int", A.BoolLit: "bool", A.CharLit: "char", A.StrLit: "string"}.get(type(e))

    def check_method_header(self, cls: A.ClassDecl, m: A.MethodDecl):
        if m.name in A.BUILTINS:
            self.err(m.span, "RESERVED_NAME", f"{m.name} is a built-in")
        if not self.valid_type(m.return_type, allow_void=True):
            self.err(m.span, "UNKNOWN_CLASS", f"unknown type {m.return_type}")
        pnames = set()
        for p in m.params:
            if not self.valid_type(p.type):
                self.err(m.span, "UNKNOWN_CLASS", f"unknown parameter type {p.type}")
            if p.name in pnames:
                self.err(m.span, "DUPLICATE_VARIABLE", f"duplicate parameter {p.name}")
            pnames.add(p.name)
        if m.is_abstract:
            if m.body is not None:
                self.err(m.span, "INVALID_MODIFIERS", "abstract method cannot have a body")
            if m.is_static or m.access == "private":
                self.err(m.span, "INVALID_MODIFIERS", "abstract methods must be public instance methods")
            if not cls.is_abstract:
                self.err(m.span, "ABSTRACT_IN_CONCRETE", f"concrete class {cls.name} declares abstract {m.name}")
        elif m.body is None:
            self.err(m.span, "MISSING_BODY", f"method {m.name} needs a body")
        if cls.superclass is not None:
            sup = self.p.lookup_method(cls.superclass, m.name)
            if sup is not None and not (
                sup.signature == m.signature and sup.return_type == m.return_type
                and not sup.is_static and not m.is_static
                and sup.access == "public" and m.access == "public"
            ):
                self.err(m.span, "INVALID_OVERRIDE",
                         f"{cls.name}.{m.name} does not validly override {sup.ref}")

    def check_abstract_coverage(self, cls: A.ClassDecl):
        if cls.is_abstract:
            return
        missing = []
        seen = set()
        for c in self.p.chain(cls.name):
            for m in self.p.classes[c].methods:
                if m.name in seen:
                    continue
                seen.add(m.name)
                if m.is_abstract:
                    missing.append(m.ref)
        for ref in missing:
            self.err(cls.span, "UNIMPLEMENTED_ABSTRACT", f"{cls.name} must implement {ref}")


class _MethodChecker:
    def __init__(self, owner: _Checker, cls: A.ClassDecl, method: A.MethodDecl):
        self.c = owner
        self.p = owner.p
        self.cls = cls
        self.m = method
        self.scopes: list[dict[str, str]] = [{p.name: p.type for p in method.params}]

    def err(self, span, code, message):
        self.c.err(span, code, message)

    def run(self):
        returns = self.block(self.m.body, new_scope=False)
        if self.m.return_type != "void" and not returns:
            self.err(self.m.span, "MISSING_RETURN", f"{self.m.name} may finish without returning a value")

    # ---------------------------------------------------------- statements
    def lookup_local(self, name: str) -> Optional[str]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def block(self, block: A.Block, new_scope: bool = True) -> bool:
        """Check a block; True if it cannot complete normally."""
        if new_scope:
            self.scopes.append({})
        done = False
        reported = False
        for s in block.stmts:
            if done and not reported:
                self.err(s.span, "UNREACHABLE_CODE", "statement is unreachable")
                reported = True
            if self.stmt(s):
                done = True
        if new_scope:
            self.scopes.pop()
        return done

    def stmt(self, s: A.Stmt) -> bool:
        if isinstance(s, A.VarDecl):
            if s.type == "void" or not self.c.valid_type(s.type):
                self.err(s.span, "UNKNOWN_CLASS" if s.type != "void" else "INVALID_TYPE",
                         f"invalid variable type {s.type}")
            if self.lookup_local(s.name) is not None:
                self.err(s.span, "DUPLICATE_VARIABLE", f"variable {s.name} already declared")
            if s.init is not None:
                t = self.expr(s.init)
                self.expect_assignable(t, s.type, s.init.span)
            self.scopes[-1][s.name] = s.type
            return False
        if isinstance(s, A.Assign):
            target_t = self.assign_target(s.target)
            t = self.expr(s.value)
            if target_t is not None:
                self.expect_assignable(t, target_t, s.value.span)
            return False
        if isinstance(s, A.If):
            self.expect_type(self.expr(s.cond), "bool", s.cond.span)
            then_ret = self.block(s.then)
            else_ret = self.block(s.orelse) if s.orelse is not None else False
            return then_ret and else_ret
        if isinstance(s, A.While):
            self.expect_type(self.expr(s.cond), "bool", s.cond.span)
            self.block(s.body)
            return isinstance(s.cond, A.BoolLit) and s.cond.value
        if isinstance(s, A.Return):
            if s.value is None:
                if self.m.return_type != "void":
                    self.err(s.span, "TYPE_MISMATCH", f"{self.m.name} must return {self.m.return_type}")
            else:
                t = self.expr(s.value)
                if self.m.return_type == "void":
                    self.err(s.span, "TYPE_MISMATCH", "void method cannot return a value")
                else:
                    self.expect_assignable(t, self.m.return_type, s.value.span)
            return True
        if isinstance(s, A.ExprStmt):
            if not isinstance(s.expr, (A.Call, A.ReflectCall)):
                self.err(s.span, "NOT_A_STATEMENT", "only calls may be used as statements")
            self.expr(s.expr, allow_void=True)
            return False
        if isinstance(s, A.ReflectSet):
            decl = self.p.classes.get(s.cls)
            if decl is None:
                self.err(s.span, "UNKNOWN_CLASS", f"unknown class {s.cls}")
                self.expr(s.value)
                return False
            f = decl.field(s.name)
            if f is None:
                self.err(s.span, "UNKNOWN_FIELD", f"{s.cls} declares no field {s.name}")
                self.expr(s.value)
                return False
            self.check_reflect_receiver(s.receiver, f.is_static, s.cls, s.span)
            self.expect_assignable(self.expr(s.value), f.declared_type, s.value.span)
            return False
        raise TypeError(s)

    def assign_target(self, target: A.Expr) -> Optional[str]:
        if isinstance(target, A.Name):
            t = self.lookup_local(target.ident)
            if t is not None:
                return t
            return self.implicit_field(target)
        if isinstance(target, A.FieldAccess):
            return self.field_access(target)
        self.err(target.span, "TYPE_MISMATCH", "invalid assignment target")
        return None

    # ---------------------------------------------------------- typing helpers
    def assignable(self, src, dst: str) -> bool:
        if src is None:
            return True  # already reported
        if src == dst:
            return True
        if src == "null":
            return dst in self.p.classes
        if isinstance(src, str) and src in self.p.classes and dst in self.p.classes:
            return self.p.is_subclass(src, dst)
        return False

    def expect_assignable(self, src, dst: str, span):
        if isinstance(src, ClassRef):
            self.err(span, "UNKNOWN_NAME", f"class {src.name} is not a value")
        elif src == "void":
            self.err(span, "VOID_VALUE", "void call used as a value")
        elif not self.assignable(src, dst):
            self.err(span, "TYPE_MISMATCH", f"expected {dst}, found {src}")

    def expect_type(self, t, want: str, span) -> None:
        if t is None:
            return
        if t != want:
            self.expect_assignable(t, want, span)

    def value(self, e: A.Expr) -> Optional[str]:
        t = self.expr(e)
        if isinstance(t, ClassRef):
            self.err(e.span, "UNKNOWN_NAME", f"class {t.name} is not a value")
            return None
        if t == "void":
            self.err(e.span, "VOID_VALUE", "void call used as a value")
            return None
        return t

    def can_access(self, declaring: str, access: str) -> bool:
        return access == "public" or declaring == self.cls.name

    # ---------------------------------------------------------- expressions
    def expr(self, e: A.Expr, allow_void: bool = False):
        t = self._expr(e)
        if t == "void" and not allow_void:
            self.err(e.span, "VOID_VALUE", "void call used as a value")
            return None
        return t

    def _expr(self, e: A.Expr):
        if isinstance(e, A.IntLit):
            return "int"
        if isinstance(e, A.BoolLit):
            return "bool"
        if isinstance(e, A.CharLit):
            return "char"
        if isinstance(e, A.StrLit):
            return "string"
        if isinstance(e, A.NullLit):
            return "null"
        if isinstance(e, A.Name):
            t = self.lookup_local(e.ident)
            if t is not None:
                return t
            if self.p.lookup_field(self.cls.name, e.ident) is not None:
                return self.implicit_field(e)
            if e.ident in self.p.classes:
                return ClassRef(e.ident)
            self.err(e.span, "UNKNOWN_NAME", f"unknown name {e.ident}")
            return None
        if isinstance(e, A.FieldAccess):
            return self.field_access(e)
        if isinstance(e, A.Unary):
            t = self.value(e.operand)
            want = "bool" if e.op == "!" else "int"
            if t is not None and t != want:
                self.err(e.span, "TYPE_MISMATCH", f"operator {e.op} needs {want}, found {t}")
            return want
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.ReflectCall):
            return self.reflect_call(e)
        if isinstance(e, A.New):
            decl = self.p.classes.get(e.cls)
            if decl is None:
                self.err(e.span, "UNKNOWN_CLASS", f"unknown class {e.cls}")
                return None
            if decl.is_abstract:
                self.err(e.span, "ABSTRACT_INSTANTIATION", f"cannot instantiate abstract class {e.cls}")
            return e.cls
        self.err(e.span, "UNKNOWN_NAME", f"unexpected expression {type(e).__name__}")
        return None

    def binary(self, e: A.Binary):
        lt, rt = self.value(e.left), self.value(e.right)
        if e.op in ("&&", "||"):
            for t, sub in ((lt, e.left), (rt, e.right)):
                if t is not None and t != "bool":
                    self.err(sub.span, "TYPE_MISMATCH", f"operator {e.op} needs bool, found {t}")
            return "bool"
        if e.op in _ARITH:
            for t, sub in ((lt, e.left), (rt, e.right)):
                if t is not None and t != "int":
                    self.err(sub.span, "TYPE_MISMATCH", f"operator {e.op} needs int, found {t}")
            return "int"
        if e.op in _ORDER:
            if lt is not None and rt is not None:
                if lt != rt or lt not in ("int", "char"):
                    self.err(e.span, "TYPE_MISMATCH", f"cannot compare {lt} {e.op} {rt}")
            return "bool"
        # == / !=
        if lt is not None and rt is not None:
            ok = lt == rt and lt != "null" or (
                (lt in self.p.classes or lt == "null") and (rt in self.p.classes or rt == "null")
                and (lt == "null" or rt == "null" or self.p.is_subclass(lt, rt) or self.p.is_subclass(rt, lt))
            )
            if lt == "null" and rt == "null":
                ok = True
            if not ok:
                self.err(e.span, "TYPE_MISMATCH", f"cannot compare {lt} {e.op} {rt}")
        return "bool"

    def implicit_field(self, e: A.Name) -> Optional[str]:
        owner = self.p.field_owner(self.cls.name, e.ident)
        if owner is None:
            self.err(e.span, "UNKNOWN_NAME", f"unknown name {e.ident}")
            return None
        f = self.p.classes[owner].field(e.ident)
        if not self.can_access(owner, f.access):
            self.err(e.span, "ACCESS_PRIVATE", f"{owner}.{f.name} is private")
        if not f.is_static and self.m.is_static:
            self.err(e.span, "STATIC_CONTEXT", f"instance field {f.name} used in static method")
        return f.declared_type

    def field_access(self, e: A.FieldAccess) -> Optional[str]:
        recv = self.expr(e.obj)
        if recv is None:
            return None
        if isinstance(recv, ClassRef):
            owner = self.p.field_owner(recv.name, e.name)
            if owner is None:
                self.err(e.span, "UNKNOWN_FIELD", f"{recv.name} has no field {e.name}")
                return None
            f = self.p.classes[owner].field(e.name)
            if not f.is_static:
                self.err(e.span, "STATIC_CONTEXT", f"{owner}.{e.name} is not static")
        elif recv in self.p.classes:
            owner = self.p.field_owner(recv, e.name)
            if owner is None:
                self.err(e.span, "UNKNOWN_FIELD", f"{recv} has no field {e.name}")
                return None
            f = self.p.classes[owner].field(e.name)
        else:
            self.err(e.span, "TYPE_MISMATCH", f"{recv} has no fields")
            return None
        if not self.can_access(owner, f.access):
            self.err(e.span, "ACCESS_PRIVATE", f"{owner}.{e.name} is private")
        return f.declared_type

    def check_args(self, e, params: tuple, name: str):
        if len(e.args) != len(params):
            self.err(e.span, "ARITY_MISMATCH", f"{name} expects {len(params)} arguments, got {len(e.args)}")
            for a in e.args:
                self.value(a)
            return
        for a, ptype in zip(e.args, params):
            self.expect_assignable(self.value(a), ptype, a.span)

    def call(self, e: A.Call):
        if e.receiver is None:
            if e.name in A.BUILTINS:
                params, ret = A.BUILTINS[e.name]
                self.check_args(e, params, e.name)
                return ret
            m = self.p.lookup_method(self.cls.name, e.name)
            if m is None:
                self.err(e.span, "UNKNOWN_METHOD", f"unknown method {e.name}")
                for a in e.args:
                    self.value(a)
                return None
            if not m.is_static and self.m.is_static:
                self.err(e.span, "STATIC_CONTEXT", f"instance method {m.name} called from static method")
        else:
            recv = self.expr(e.receiver)
            if recv is None:
                for a in e.args:
                    self.value(a)
                return None
            cls_name = recv.name if isinstance(recv, ClassRef) else recv
            if cls_name not in self.p.classes:
                self.err(e.span, "TYPE_MISMATCH", f"{recv} has no methods")
                return None
            m = self.p.lookup_method(cls_name, e.name)
            if m is None:
                self.err(e.span, "UNKNOWN_METHOD", f"{cls_name} has no method {e.name}")
                for a in e.args:
                    self.value(a)
                return None
            if isinstance(recv, ClassRef) and not m.is_static:
                self.err(e.span, "STATIC_CONTEXT", f"{m.ref} is not static")
        if not self.can_access(m.owner, m.access):
            self.err(e.span, "ACCESS_PRIVATE", f"{m.ref} is private")
        self.check_args(e, m.param_types, m.name)
        return m.return_type

    def check_reflect_receiver(self, receiver, is_static: bool, cls: str, span):
        if is_static:
            if receiver is not None:
                self.err(span, "REFLECT_MISMATCH", f"static member of {cls} takes no receiver")
                self.expr(receiver)
            return
        if receiver is None:
            self.err(span, "REFLECT_MISMATCH", f"instance member of {cls} needs a receiver")
            return
        t = self.value(receiver)
        if t is not None and not (t in self.p.classes and self.p.is_subclass(t, cls)):
            self.err(receiver.span, "TYPE_MISMATCH", f"receiver of type {t} is not a {cls}")

    def reflect_call(self, e: A.ReflectCall):
        decl = self.p.classes.get(e.cls)
        if decl is None:
            self.err(e.span, "UNKNOWN_CLASS", f"unknown class {e.cls}")
            return None
        m = decl.method(e.name)
        if m is None:
            self.err(e.span, "UNKNOWN_METHOD", f"{e.cls} declares no method {e.name}")
            return None
        self.check_reflect_receiver(e.receiver, m.is_static, e.cls, e.span)
        self.check_args(e, m.param_types, m.name)
        return m.return_type

"""Tree-walking interpreter with statement/branch/entry instrumentation.

Guards of ``if`` and ``while`` are evaluated one atomic condition at a time
(``&&``, ``||`` and ``!`` are walked structurally), and each atomic
evaluation is recorded as a branch event keyed by the method and the span of
that condition. The CFG builder uses the same decomposition, so branch
events and CFG branch nodes line up one to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

from pathwise.errors import EngineError
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.dispatch import resolve_dispatch
from pathwise.subjectlang.project import Project

DEFAULT_STEP_BUDGET = 100_000
MAX_CALL_DEPTH = 200

EXCEPTION_KINDS = ("STEP_BUDGET_EXCEEDED", "DIVISION_BY_ZERO", "INDEX_OUT_OF_BOUNDS",
                   "NULL_RECEIVER", "STACK_OVERFLOW")


class StmtEvent(NamedTuple):
    method: str
    span: A.Span


class BranchEvent(NamedTuple):
    method: str
    span: A.Span
    outcome: bool
    activation: int

    @property
    def branch_id(self) -> tuple[str, A.Span]:
        return (self.method, self.span)


class EnterEvent(NamedTuple):
    method: str
    activation: int


class ExceptionEvent(NamedTuple):
    method: str
    span: A.Span
    kind: str
    message: str


@dataclass
class ExecutionTrace:
    events: list = field(default_factory=list)
    focal_reached: bool = False
    outcome: str = "completed"  # or "uncaught-exception"
    focal_activation: Optional[int] = None
    result: object = None

    @property
    def exception(self) -> Optional[ExceptionEvent]:
        for ev in reversed(self.events):
            if isinstance(ev, ExceptionEvent):
                return ev
        return None

    def branch_events(self, method: Optional[str] = None, activation: Optional[int] = None):
        return [ev for ev in self.events if isinstance(ev, BranchEvent)
                and (method is None or ev.method == method)
                and (activation is None or ev.activation == activation)]

    def focal_branch_outcomes(self) -> list[tuple[A.Span, bool]]:
        """Branch events of the first focal activation, as (span, outcome)."""
        if self.focal_activation is None:
            return []
        return [(ev.span, ev.outcome) for ev in self.events
                if isinstance(ev, BranchEvent) and ev.activation == self.focal_activation]


class SubjectException(Exception):
    def __init__(self, kind: str, message: str, span: A.Span):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.method: Optional[str] = None


class Obj:
    __slots__ = ("cls", "fields")

    def __init__(self, cls: str, fields: dict):
        self.cls = cls
        self.fields = fields

    def __repr__(self) -> str:
        return f"<{self.cls}>"


class _Frame:
    __slots__ = ("method", "ref", "cls", "this", "locals", "activation")

    def __init__(self, method: A.MethodDecl, this: Optional[Obj], locals_: dict, activation: int):
        self.method = method
        self.ref = method.ref
        self.cls = method.owner
        self.this = this
        self.locals = locals_
        self.activation = activation


class _Return(Exception):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


_CLASSREF = object()


def _java_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


class Interpreter:
    """Executes one project. Each :meth:`run`/:meth:`invoke` starts from fresh state."""

    def __init__(self, project: Project, focal: Optional[str] = None,
                 step_budget: int = DEFAULT_STEP_BUDGET, record_statements: bool = True):
        self.p = project
        self.focal = focal
        self.step_budget = step_budget
        self.record_statements = record_statements
        self._field_cache: dict[tuple[str, str], tuple[str, A.FieldDecl]] = {}
        self._ev = {
            A.IntLit: self._lit, A.BoolLit: self._lit, A.CharLit: self._lit, A.StrLit: self._lit,
            A.NullLit: lambda e, f: None,
            A.Name: self._name, A.FieldAccess: self._field_access, A.Binary: self._binary,
            A.Unary: self._unary, A.Call: self._call, A.ReflectCall: self._reflect_call,
            A.New: lambda e, f: self.new_object(e.cls),
        }

    # --------------------------------------------------------------- entry points
    def run(self, entry: str) -> ExecutionTrace:
        """Execute the public static zero-parameter method ``entry``."""
        method = self.p.method(entry)
        if method is None or method.params or not method.is_static:
            raise EngineError(f"{entry} is not a static zero-parameter method")
        return self._run(lambda: self.call_method(method, None, (), A.NOSPAN))

    def invoke(self, method_ref: str, args: Sequence, receiver_class: Optional[str] = None,
               static_fields: Optional[dict] = None, instance_fields: Optional[dict] = None,
               virtual: bool = True) -> ExecutionTrace:
        """Call one method directly, as a test harness would.

        ``static_fields`` and ``instance_fields`` map ``(owner, name)`` to a value
        and are written before the call without access checks. With ``virtual``
        the target is re-resolved from the receiver's runtime class. An
        :class:`~pathwise.subjectlang.ast.New` argument is instantiated fresh.
        """
        method = self.p.method(method_ref)
        if method is None:
            raise EngineError(f"unknown method {method_ref}")

        def driver():
            for key, value in (static_fields or {}).items():
                self.statics[key] = value
            this = None
            target = method
            if receiver_class is not None:
                this = self.new_object(receiver_class)
                for key, value in (instance_fields or {}).items():
                    this.fields[key] = value
                if virtual and not method.is_static and method.access == "public":
                    target = resolve_dispatch(receiver_class, method.signature, self.p)
            values = tuple(self.new_object(a.cls) if isinstance(a, A.New) else a for a in args)
            return self.call_method(target, this, values, A.NOSPAN)

        return self._run(driver)

    def _run(self, driver: Callable) -> ExecutionTrace:
        self.events: list = []
        self.steps = 0
        self.depth = 0
        self.activations = 0
        self.focal_activation: Optional[int] = None
        self.statics = {}
        for cname, cls in self.p.classes.items():
            for f in cls.fields:
                if f.is_static:
                    self.statics[(cname, f.name)] = self._initial(f)
        trace = ExecutionTrace(self.events)
        try:
            trace.result = driver()
        except SubjectException as exc:
            self.events.append(ExceptionEvent(exc.method or "", exc.span, exc.kind, exc.message))
            trace.outcome = "uncaught-exception"
        except RecursionError:
            self.events.append(ExceptionEvent("", A.NOSPAN, "STACK_OVERFLOW",
                                              "call depth exceeded"))
            trace.outcome = "uncaught-exception"
        trace.focal_activation = self.focal_activation
        trace.focal_reached = self.focal_activation is not None
        return trace

    @staticmethod
    def _initial(f: A.FieldDecl):
        if f.initializer is not None:
            return f.initializer.value
        return A.default_value(f.declared_type)

    # --------------------------------------------------------------- objects/calls
    def new_object(self, cls: str) -> Obj:
        return Obj(cls, {(owner, f.name): self._initial(f) for owner, f in self.p.instance_fields(cls)})

    def call_method(self, method: A.MethodDecl, this: Optional[Obj], args: tuple, span: A.Span):
        if method.body is None:
            raise EngineError(f"call to abstract {method.ref}")
        if self.depth >= MAX_CALL_DEPTH:
            raise SubjectException("STACK_OVERFLOW", "call depth exceeded", span)
        self.activations += 1
        act = self.activations
        ref = method.ref
        self.events.append(EnterEvent(ref, act))
        if ref == self.focal and self.focal_activation is None:
            self.focal_activation = act
        frame = _Frame(method, this, {p.name: a for p, a in zip(method.params, args)}, act)
        self.depth += 1
        try:
            self._block(method.body.stmts, frame)
        except _Return as r:
            return r.value
        except SubjectException as exc:
            if exc.method is None:
                exc.method = ref
            raise
        finally:
            self.depth -= 1
        return None

    def _dispatch(self, this: Obj, method: A.MethodDecl) -> A.MethodDecl:
        if method.is_static or method.access == "private":
            return method
        return resolve_dispatch(this.cls, method.signature, self.p)

    # --------------------------------------------------------------- statements
    def _tick(self, span: A.Span):
        self.steps += 1
        if self.steps > self.step_budget:
            raise SubjectException("STEP_BUDGET_EXCEEDED", f"more than {self.step_budget} steps", span)

    def _block(self, stmts, frame: _Frame):
        for s in stmts:
            self._stmt(s, frame)

    def _stmt(self, s, frame: _Frame):
        self._tick(s.span)
        if self.record_statements:
            self.events.append(StmtEvent(frame.ref, s.span))
        t = type(s)
        if t is A.VarDecl:
            frame.locals[s.name] = (self._eval(s.init, frame) if s.init is not None
                                    else A.default_value(s.type))
        elif t is A.Assign:
            self._assign(s.target, self._eval(s.value, frame), frame)
        elif t is A.If:
            if self._cond(s.cond, frame):
                self._block(s.then.stmts, frame)
            elif s.orelse is not None:
                self._block(s.orelse.stmts, frame)
        elif t is A.While:
            while self._cond(s.cond, frame):
                self._block(s.body.stmts, frame)
                self._tick(s.span)
        elif t is A.Return:
            raise _Return(None if s.value is None else self._eval(s.value, frame))
        elif t is A.ExprStmt:
            self._eval(s.expr, frame)
        elif t is A.ReflectSet:
            value = self._eval(s.value, frame)
            if s.receiver is None:
                self.statics[(s.cls, s.name)] = value
            else:
                obj = self._eval(s.receiver, frame)
                if obj is None:
                    raise SubjectException("NULL_RECEIVER", f"reflect set {s.cls}#{s.name} on null", s.span)
                obj.fields[(s.cls, s.name)] = value
        else:
            raise EngineError(f"unknown statement {t.__name__}")

    def _cond(self, e, frame: _Frame) -> bool:
        t = type(e)
        if t is A.Binary and e.op == "&&":
            return self._cond(e.left, frame) and self._cond(e.right, frame)
        if t is A.Binary and e.op == "||":
            return self._cond(e.left, frame) or self._cond(e.right, frame)
        if t is A.Unary and e.op == "!":
            return not self._cond(e.operand, frame)
        value = self._eval(e, frame)
        if type(value) is not bool:
            raise EngineError(f"guard evaluated to {value!r}")
        self.events.append(BranchEvent(frame.ref, e.span, value, frame.activation))
        return value

    def _assign(self, target, value, frame: _Frame):
        if type(target) is A.Name:
            if target.ident in frame.locals:
                frame.locals[target.ident] = value
                return
            owner, f = self._resolve_field(frame.cls, target.ident, target.span)
            if f.is_static:
                self.statics[(owner, f.name)] = value
            else:
                frame.this.fields[(owner, f.name)] = value
            return
        if type(target) is A.FieldAccess:
            recv = self._receiver(target.obj, frame)
            if recv is _CLASSREF:
                owner, f = self._resolve_field(target.obj.ident, target.name, target.span)
                self.statics[(owner, f.name)] = value
                return
            if recv is None:
                raise SubjectException("NULL_RECEIVER", f"field {target.name} written on null", target.span)
            owner, f = self._resolve_field(recv.cls, target.name, target.span)
            if f.is_static:
                self.statics[(owner, f.name)] = value
            else:
                recv.fields[(owner, f.name)] = value
            return
        raise EngineError("invalid assignment target")

    # --------------------------------------------------------------- expressions
    def _eval(self, e, frame: _Frame):
        return self._ev[type(e)](e, frame)

    @staticmethod
    def _lit(e, frame):
        return e.value

    def _resolve_field(self, cls: str, name: str, span) -> tuple[str, A.FieldDecl]:
        key = (cls, name)
        hit = self._field_cache.get(key)
        if hit is None:
            owner = self.p.field_owner(cls, name)
            if owner is None:
                raise EngineError(f"unknown field {cls}.{name} at {span}")
            hit = (owner, self.p.classes[owner].field(name))
            self._field_cache[key] = hit
        return hit

    def _name(self, e: A.Name, frame: _Frame):
        loc = frame.locals
        if e.ident in loc:
            return loc[e.ident]
        owner, f = self._resolve_field(frame.cls, e.ident, e.span)
        if f.is_static:
            return self.statics[(owner, f.name)]
        if frame.this is None:
            raise EngineError(f"instance field {e.ident} without receiver")
        return frame.this.fields[(owner, f.name)]

    def _receiver(self, obj_expr, frame: _Frame):
        """Evaluate a receiver; a bare class name yields the class marker."""
        if type(obj_expr) is A.Name and obj_expr.ident not in frame.locals \
                and self.p.field_owner(frame.cls, obj_expr.ident) is None \
                and obj_expr.ident in self.p.classes:
            return _CLASSREF
        return self._eval(obj_expr, frame)

    def _field_access(self, e: A.FieldAccess, frame: _Frame):
        recv = self._receiver(e.obj, frame)
        if recv is _CLASSREF:
            owner, f = self._resolve_field(e.obj.ident, e.name, e.span)
            return self.statics[(owner, f.name)]
        if recv is None:
            raise SubjectException("NULL_RECEIVER", f"field {e.name} read on null", e.span)
        owner, f = self._resolve_field(recv.cls, e.name, e.span)
        if f.is_static:
            return self.statics[(owner, f.name)]
        return recv.fields[(owner, f.name)]

    def _unary(self, e: A.Unary, frame: _Frame):
        v = self._eval(e.operand, frame)
        return (not v) if e.op == "!" else -v

    def _binary(self, e: A.Binary, frame: _Frame):
        op = e.op
        if op == "&&":
            return bool(self._eval(e.left, frame)) and bool(self._eval(e.right, frame))
        if op == "||":
            return bool(self._eval(e.left, frame)) or bool(self._eval(e.right, frame))
        a = self._eval(e.left, frame)
        b = self._eval(e.right, frame)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "==":
            return a is b if type(a) is Obj or type(b) is Obj else a == b
        if op == "!=":
            return a is not b if type(a) is Obj or type(b) is Obj else a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op in ("/", "%"):
            if b == 0:
                raise SubjectException("DIVISION_BY_ZERO", f"{op} by zero", e.span)
            q = _java_div(a, b)
            return q if op == "/" else a - b * q
        raise EngineError(f"unknown operator {op}")

    def _call(self, e: A.Call, frame: _Frame):
        if e.receiver is None:
            if e.name in A.BUILTINS:
                return self._builtin(e, [self._eval(a, frame) for a in e.args])
            method = self.p.lookup_method(frame.cls, e.name)
            if method is None:
                raise EngineError(f"unknown method {e.name}")
            args = tuple(self._eval(a, frame) for a in e.args)
            if method.is_static:
                return self.call_method(method, None, args, e.span)
            return self.call_method(self._dispatch(frame.this, method), frame.this, args, e.span)
        recv = self._receiver(e.receiver, frame)
        if recv is _CLASSREF:
            method = self.p.lookup_method(e.receiver.ident, e.name)
            args = tuple(self._eval(a, frame) for a in e.args)
            return self.call_method(method, None, args, e.span)
        args = tuple(self._eval(a, frame) for a in e.args)
        if recv is None:
            raise SubjectException("NULL_RECEIVER", f"call {e.name} on null", e.span)
        method = self.p.lookup_method(recv.cls, e.name)
        if method is None:
            raise EngineError(f"unknown method {recv.cls}.{e.name}")
        if method.is_static:
            return self.call_method(method, None, args, e.span)
        return self.call_method(self._dispatch(recv, method), recv, args, e.span)

    def _reflect_call(self, e: A.ReflectCall, frame: _Frame):
        method = self.p.classes[e.cls].method(e.name)
        if e.receiver is None:
            args = tuple(self._eval(a, frame) for a in e.args)
            return self.call_method(method, None, args, e.span)
        recv = self._eval(e.receiver, frame)
        args = tuple(self._eval(a, frame) for a in e.args)
        if recv is None:
            raise SubjectException("NULL_RECEIVER", f"reflect call {e.cls}#{e.name} on null", e.span)
        return self.call_method(self._dispatch(recv, method), recv, args, e.span)

    def _builtin(self, e: A.Call, args: list):
        name = e.name
        if name == "length":
            return len(args[0])
        if name == "charAt":
            s, i = args
            if not 0 <= i < len(s):
                raise SubjectException("INDEX_OUT_OF_BOUNDS", f"charAt({i}) on length {len(s)}", e.span)
            return s[i]
        if name == "indexOf":
            return args[0].find(args[1])
        if name == "substring":
            s, lo, hi = args
            if not 0 <= lo <= hi <= len(s):
                raise SubjectException("INDEX_OUT_OF_BOUNDS",
                                       f"substring({lo}, {hi}) on length {len(s)}", e.span)
            return s[lo:hi]
        if name == "concat":
            return args[0] + args[1]
        raise EngineError(f"unknown builtin {name}")


def execute(project, entry: str, focal: Optional[str] = None,
            step_budget: int = DEFAULT_STEP_BUDGET) -> ExecutionTrace:
    """Run ``entry`` (a public static zero-parameter method) with focal instrumentation."""
    proj = project if isinstance(project, Project) else Project(project)
    return Interpreter(proj, focal=focal, step_budget=step_budget).run(entry)

"""Recursive-descent parser. The grammar is written out in docs/grammar.ebnf."""

from __future__ import annotations

from pathwise.errors import ParseError
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.diagnostics import Diagnostic, error
from pathwise.subjectlang.lexer import Token, tokenize

_TYPE_KWS = ("int", "bool", "char", "string", "void")
_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


def parse(text: str, path: str = "<input>") -> A.SourceUnit:
    """Parse one source file.

    Raises :class:`ParseError` carrying the diagnostics on any syntax error;
    no partial unit is ever returned.
    """
    return _Parser(tokenize(text, path), path).unit()


def parse_expression(text: str, path: str = "<expr>") -> A.Expr:
    p = _Parser(tokenize(text, path), path)
    expr = p.expr()
    p.expect_kind("eof")
    p.raise_if_errors()
    return expr


class _Parser:
    def __init__(self, tokens: list[Token], path: str):
        self.toks = tokens
        self.pos = 0
        self.path = path
        self.diags: list[Diagnostic] = []

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def fail(self, tok: Token, message: str, span: A.Span | None = None):
        self.diags.append(error(span or tok.span, "SYNTAX_ERROR", message, self.path))
        raise ParseError(sorted(self.diags, key=Diagnostic.sort_key))

    def raise_if_errors(self):
        if self.diags:
            raise ParseError(sorted(self.diags, key=Diagnostic.sort_key))

    def expect(self, text: str, opener: Token | None = None) -> Token:
        if not self.at(text):
            if opener is not None:
                self.fail(self.tok, f"expected '{text}' to close '{opener.text}' opened here, "
                          f"found {self.describe(self.tok)}", span=opener.span)
            self.fail(self.tok, f"expected '{text}', found {self.describe(self.tok)}")
        return self.advance()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail(self.tok, f"expected {kind}, found {self.describe(self.tok)}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail(self.tok, f"expected identifier, found {self.describe(self.tok)}")
        return self.advance()

    @staticmethod
    def describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else f"'{tok.text}'"

    # -- declarations
    def unit(self) -> A.SourceUnit:
        classes = []
        while self.tok.kind != "eof":
            classes.append(self.class_decl())
        self.raise_if_errors()
        return A.SourceUnit(self.path, tuple(classes))

    def class_decl(self) -> A.ClassDecl:
        start = self.tok
        is_abstract = self.accept("abstract") is not None
        self.expect("class")
        name = self.ident().text
        superclass = None
        if self.accept("extends"):
            superclass = self.ident().text
        lbrace = self.expect("{")
        fields, methods = [], []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail(self.tok, "unterminated class body", span=lbrace.span)
            member = self.member(name)
            (methods if isinstance(member, A.MethodDecl) else fields).append(member)
        self.expect("}")
        return A.ClassDecl(name, superclass, is_abstract, tuple(fields), tuple(methods), start.span)

    def member(self, owner: str):
        start = self.tok
        access = None
        if self.at("public") or self.at("private"):
            access = self.advance().text
        else:
            # recoverable: record and keep parsing so later errors are reported too
            self.diags.append(error(start.span, "SYNTAX_ERROR",
                                    f"expected 'public' or 'private', found {self.describe(start)}",
                                    self.path))
            access = "private"
        is_static = self.accept("static") is not None
        is_abstract = self.accept("abstract") is not None
        type_tok = self.tok
        type_name = self.type_name()
        name = self.ident().text
        if self.at("("):
            lparen = self.advance()
            params = []
            if not self.at(")"):
                while True:
                    if not (self.tok.kind == "ident" or (self.tok.kind == "kw" and self.tok.text in _TYPE_KWS)):
                        self.fail(self.tok, "malformed parameter list", span=lparen.span)
                    ptype = self.type_name()
                    if self.tok.kind != "ident":
                        self.fail(self.tok, "malformed parameter list", span=lparen.span)
                    params.append(A.Param(ptype, self.advance().text))
                    if not self.accept(","):
                        break
            self.expect(")", opener=lparen)
            body = None
            if not self.accept(";"):
                if not self.at("{"):
                    self.fail(self.tok, f"expected method body or ';', found {self.describe(self.tok)}")
                body = self.block()
            return A.MethodDecl(owner, name, tuple(params), type_name, is_static, is_abstract,
                                access, body, start.span)
        if is_abstract:
            self.fail(type_tok, "fields cannot be abstract")
        if type_name == "void":
            self.fail(type_tok, "fields cannot have type void")
        init = None
        if self.accept("="):
            init = self.const()
        self.expect(";")
        return A.FieldDecl(name, type_name, is_static, access, init, start.span)

    def const(self) -> A.Expr:
        t = self.tok
        if t.kind == "op" and t.text == "-" and self.peek().kind == "int":
            self.advance()
            return A.IntLit(-self.advance().value, t.span)
        if t.kind in ("int", "char", "string") or (t.kind == "kw" and t.text in ("true", "false", "null")):
            return self.primary()
        self.fail(t, f"expected constant initializer, found {self.describe(t)}")

    def type_name(self) -> str:
        t = self.tok
        if t.kind == "kw" and t.text in _TYPE_KWS:
            return self.advance().text
        if t.kind == "ident":
            return self.advance().text
        self.fail(t, f"expected type, found {self.describe(t)}")

    # -- statements
    def block(self) -> A.Block:
        lbrace = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail(self.tok, "unterminated block", span=lbrace.span)
            stmts.append(self.stmt())
        self.expect("}")
        return A.Block(tuple(stmts), lbrace.span)

    def stmt(self) -> A.Stmt:
        t = self.tok
        if self.at("if"):
            return self.if_stmt()
        if self.accept("while"):
            lparen = self.expect("(")
            cond = self.expr()
            self.expect(")", opener=lparen)
            return A.While(cond, self.block(), t.span)
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return A.Return(value, t.span)
        if self.at("reflect") and self.peek().kind == "ident" and self.peek().text == "set":
            self.advance()
            self.advance()
            receiver, cls, name = self.reflect_target()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return A.ReflectSet(receiver, cls, name, value, t.span)
        if (t.kind == "kw" and t.text in _TYPE_KWS) or (t.kind == "ident" and self.peek().kind == "ident"):
            type_name = self.type_name()
            name = self.ident().text
            init = self.expr() if self.accept("=") else None
            self.expect(";")
            return A.VarDecl(type_name, name, init, t.span)
        target = self.expr()
        if self.accept("="):
            if not isinstance(target, (A.Name, A.FieldAccess)):
                self.fail(t, "invalid assignment target")
            value = self.expr()
            self.expect(";")
            return A.Assign(target, value, t.span)
        self.expect(";")
        return A.ExprStmt(target, t.span)

    def if_stmt(self) -> A.If:
        t = self.expect("if")
        lparen = self.expect("(")
        cond = self.expr()
        self.expect(")", opener=lparen)
        then = self.block()
        orelse = None
        if self.accept("else"):
            if self.at("if"):
                nested = self.if_stmt()
                orelse = A.Block((nested,), nested.span)
            else:
                orelse = self.block()
        return A.If(cond, then, orelse, t.span)

    def reflect_target(self):
        """``Cls#name`` or ``<postfix-expr>.Cls#name``."""
        if self.tok.kind == "ident" and self.peek().kind == "op" and self.peek().text == "#":
            cls = self.advance().text
            self.advance()
            return None, cls, self.ident().text
        start = self.tok
        target = self.postfix()
        if not isinstance(target, A.FieldAccess) or not self.at("#"):
            self.fail(start, "expected reflective target 'receiver.Class#member' or 'Class#member'")
        self.advance()
        return target.obj, target.name, self.ident().text

    # -- expressions
    def expr(self) -> A.Expr:
        return self.binary(0)

    def binary(self, level: int) -> A.Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance().text
            right = self.binary(level + 1)
            left = A.Binary(op, left, right, left.span)
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("!", "-"):
            self.advance()
            operand = self.unary()
            if t.text == "-" and isinstance(operand, A.IntLit) and operand.value >= 0:
                return A.IntLit(-operand.value, t.span)
            return A.Unary(t.text, operand, t.span)
        return self.postfix()

    def postfix(self) -> A.Expr:
        expr = self.primary()
        while self.at(".") and self.peek().kind == "ident":
            self.advance()
            name = self.advance().text
            if self.at("("):
                expr = A.Call(expr, name, self.args(), expr.span)
            else:
                expr = A.FieldAccess(expr, name, expr.span)
        return expr

    def args(self) -> tuple[A.Expr, ...]:
        lparen = self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.expr())
                if not self.accept(","):
                    break
        self.expect(")", opener=lparen)
        return tuple(args)

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.IntLit(t.value, t.span)
        if t.kind == "char":
            self.advance()
            return A.CharLit(t.value, t.span)
        if t.kind == "string":
            self.advance()
            return A.StrLit(t.value, t.span)
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.advance()
                return A.BoolLit(t.text == "true", t.span)
            if t.text == "null":
                self.advance()
                return A.NullLit(t.span)
            if t.text == "new":
                self.advance()
                cls = self.ident().text
                lparen = self.expect("(")
                self.expect(")", opener=lparen)
                return A.New(cls, t.span)
            if t.text == "reflect" and self.peek().kind == "ident" and self.peek().text == "call":
                self.advance()
                self.advance()
                receiver, cls, name = self.reflect_target()
                return A.ReflectCall(receiver, cls, name, self.args(), t.span)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")", opener=t)
            return inner
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return A.Call(None, t.text, self.args(), t.span)
            return A.Name(t.text, t.span)
        self.fail(t, f"expected expression, found {self.describe(t)}")

from __future__ import annotations

import re
from dataclasses import dataclass

from pathwise.errors import ParseError
from pathwise.subjectlang.ast import Span
from pathwise.subjectlang.diagnostics import error

KEYWORDS = {
    "class", "extends", "abstract", "public", "private", "static",
    "int", "bool", "char", "string", "void",
    "if", "else", "while", "return", "true", "false", "null", "new", "reflect",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<char>'(?:\\.|[^'\\\n])')
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<op>&&|\|\||==|!=|<=|>=|[{}()\[\];,.\#=<>+\-*/%!])
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"n": "\n", "t": "\t", "0": "\0", "\\": "\\", "'": "'", '"': '"', "r": "\r"}
_UNESCAPE = {v: "\\" + k for k, v in _ESCAPES.items()}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # ident, kw, int, char, string, op, eof
    text: str
    span: Span
    value: object = None


def unescape(body: str, span: Span, path: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1] if i + 1 < len(body) else ""
            if nxt not in _ESCAPES:
                raise ParseError([error(span, "SYNTAX_ERROR", f"bad escape '\\{nxt}'", path)])
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape(text: str) -> str:
    return "".join(_UNESCAPE.get(ch, ch) for ch in text)


def tokenize(text: str, path: str = "") -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = Span(line, pos - line_start + 1)
        if m is None:
            raise ParseError([error(span, "SYNTAX_ERROR", f"unexpected character {text[pos]!r}", path)])
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block":
            line += lexeme.count("\n")
            if "\n" in lexeme:
                line_start = pos + lexeme.rindex("\n") + 1
        elif kind == "int":
            tokens.append(Token("int", lexeme, span, int(lexeme)))
        elif kind == "ident":
            tokens.append(Token("kw" if lexeme in KEYWORDS else "ident", lexeme, span))
        elif kind == "char":
            tokens.append(Token("char", lexeme, span, unescape(lexeme[1:-1], span, path)))
        elif kind == "string":
            tokens.append(Token("string", lexeme, span, unescape(lexeme[1:-1], span, path)))
        elif kind == "op":
            tokens.append(Token("op", lexeme, span))
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return tokens

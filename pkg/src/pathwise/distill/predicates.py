"""Parameter predicates: a closed vocabulary of per-subject atoms.

A subject is a parameter (or field) name, or a ``charAt(...)`` term over
them. Integer subjects carry an interval whose ends keep the form they were
written in (``p >= 3`` stays closed at 3, ``p > 2`` stays open at 2) plus a set
of excluded values. String subjects carry a length interval and optional
equality facts; char subjects carry allowed/forbidden sets. Conjunctions that
are provably unsatisfiable collapse to :data:`EMPTY`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from pathwise.knowledge.deps import COMPARISONS, FLIP, NEGATE
from pathwise.subjectlang import ast as A
from pathwise.subjectlang.printer import pretty_expr


# ---------------------------------------------------------------------- intervals

@dataclass(frozen=True)
class IntRange:
    lo: Optional[int] = None
    lo_closed: bool = True
    hi: Optional[int] = None
    hi_closed: bool = True
    excluded: frozenset = frozenset()

    @property
    def lo_eff(self) -> Optional[int]:
        if self.lo is None:
            return None
        return self.lo if self.lo_closed else self.lo + 1

    @property
    def hi_eff(self) -> Optional[int]:
        if self.hi is None:
            return None
        return self.hi if self.hi_closed else self.hi - 1

    def contains(self, v: int) -> bool:
        lo, hi = self.lo_eff, self.hi_eff
        return (lo is None or v >= lo) and (hi is None or v <= hi) and v not in self.excluded

    def is_empty(self) -> bool:
        lo, hi = self.lo_eff, self.hi_eff
        if lo is not None and hi is not None:
            if lo > hi:
                return True
            if hi - lo < len(self.excluded) + 1:
                return all(v in self.excluded for v in range(lo, hi + 1))
        return False

    def intersect(self, other: "IntRange") -> "IntRange":
        lo, lo_c = self.lo, self.lo_closed
        if other.lo is not None and (lo is None or other.lo_eff > self.lo_eff):
            lo, lo_c = other.lo, other.lo_closed
        hi, hi_c = self.hi, self.hi_closed
        if other.hi is not None and (hi is None or other.hi_eff < self.hi_eff):
            hi, hi_c = other.hi, other.hi_closed
        merged = IntRange(lo, lo_c, hi, hi_c, self.excluded | other.excluded)
        # drop exclusions that fall outside the interval
        keep = frozenset(v for v in merged.excluded if IntRange(lo, lo_c, hi, hi_c).contains(v))
        return dataclasses.replace(merged, excluded=keep)

    def is_unbounded(self) -> bool:
        return self.lo is None and self.hi is None and not self.excluded

    def conditions(self, subject) -> list[tuple[object, bool]]:
        out = []
        if self.lo is not None:
            out.append((A.Binary(">=" if self.lo_closed else ">", subject, A.IntLit(self.lo)), True))
        if self.hi is not None:
            out.append((A.Binary("<=" if self.hi_closed else "<", subject, A.IntLit(self.hi)), True))
        for v in sorted(self.excluded):
            out.append((A.Binary("==", subject, A.IntLit(v)), False))
        return out

    def render(self, name: str) -> list[str]:
        parts = []
        lo_op = "<=" if self.lo_closed else "<"
        hi_op = "<=" if self.hi_closed else "<"
        if self.lo is not None and self.hi is not None:
            if self.lo_eff == self.hi_eff and self.lo_closed and self.hi_closed:
                parts.append(f"{name} == {self.lo}")
            else:
                parts.append(f"{self.lo} {lo_op} {name} {hi_op} {self.hi}")
        elif self.lo is not None:
            parts.append(f"{name} {'>=' if self.lo_closed else '>'} {self.lo}")
        elif self.hi is not None:
            parts.append(f"{name} {hi_op} {self.hi}")
        parts.extend(f"{name} != {v}" for v in sorted(self.excluded))
        return parts


def _range_for(op: str, c: int) -> IntRange:
    if op == "<":
        return IntRange(hi=c, hi_closed=False)
    if op == "<=":
        return IntRange(hi=c)
    if op == ">":
        return IntRange(lo=c, lo_closed=False)
    if op == ">=":
        return IntRange(lo=c)
    if op == "==":
        return IntRange(lo=c, hi=c)
    return IntRange(excluded=frozenset({c}))


# ---------------------------------------------------------------------- atoms

@dataclass(frozen=True)
class IntAtom:
    range: IntRange = IntRange()

    def intersect(self, other):
        return IntAtom(self.range.intersect(other.range))

    def is_empty(self) -> bool:
        return self.range.is_empty()

    def holds(self, v) -> bool:
        return isinstance(v, int) and not isinstance(v, bool) and self.range.contains(v)

    def conditions(self, subject):
        return self.range.conditions(subject)

    def render(self, name):
        return self.range.render(name)


@dataclass(frozen=True)
class BoolAtom:
    value: Optional[bool] = None  # None: contradictory

    def intersect(self, other):
        return self if self.value == other.value else BoolAtom(None)

    def is_empty(self) -> bool:
        return self.value is None

    def holds(self, v) -> bool:
        return v is self.value

    def conditions(self, subject):
        return [(A.Binary("==", subject, A.BoolLit(bool(self.value))), True)]

    def render(self, name):
        return [f"{name} == {'true' if self.value else 'false'}"]


@dataclass(frozen=True)
class CharAtom:
    allowed: Optional[frozenset] = None  # None: any char not forbidden
    forbidden: frozenset = frozenset()

    def intersect(self, other):
        if self.allowed is None:
            allowed = other.allowed
        elif other.allowed is None:
            allowed = self.allowed
        else:
            allowed = self.allowed & other.allowed
        forbidden = self.forbidden | other.forbidden
        if allowed is not None:
            allowed = allowed - forbidden
            forbidden = frozenset()
        return CharAtom(allowed, forbidden)

    def is_empty(self) -> bool:
        return self.allowed is not None and not (self.allowed - self.forbidden)

    def holds(self, v) -> bool:
        if not isinstance(v, str) or len(v) != 1:
            return False
        return (self.allowed is None or v in self.allowed) and v not in self.forbidden

    def conditions(self, subject):
        out = []
        if self.allowed is not None:
            out.append((A.Binary("!=", A.Call(None, "indexOf", (A.StrLit(_chars(self.allowed)), subject)),
                                 A.IntLit(-1)), True))
        if self.forbidden:
            out.append((A.Binary("==", A.Call(None, "indexOf", (A.StrLit(_chars(self.forbidden)), subject)),
                                 A.IntLit(-1)), True))
        return out

    def render(self, name):
        out = []
        if self.allowed is not None:
            out.append(f"{name} in {_quote(_chars(self.allowed))}")
        if self.forbidden:
            out.append(f"{name} not in {_quote(_chars(self.forbidden))}")
        return out


@dataclass(frozen=True)
class StrAtom:
    length: IntRange = IntRange()
    equals: Optional[str] = None
    not_equals: frozenset = frozenset()
    contradictory: bool = False

    def intersect(self, other):
        bad = self.contradictory or other.contradictory
        eq = self.equals
        if other.equals is not None:
            if eq is not None and eq != other.equals:
                bad = True
            eq = other.equals
        return StrAtom(self.length.intersect(other.length), eq,
                       self.not_equals | other.not_equals, bad)

    def is_empty(self) -> bool:
        if self.contradictory:
            return True
        rng = self.length.intersect(IntRange(lo=0))
        if rng.is_empty():
            return True
        if self.equals is not None:
            return not rng.contains(len(self.equals)) or self.equals in self.not_equals
        return False

    def holds(self, v) -> bool:
        if not isinstance(v, str):
            return False
        if not self.length.contains(len(v)) or v in self.not_equals:
            return False
        return self.equals is None or v == self.equals

    def conditions(self, subject):
        length = A.Call(None, "length", (subject,))
        out = list(self.length.conditions(length))
        if self.equals is not None:
            out.append((A.Binary("==", subject, A.StrLit(self.equals)), True))
        for s in sorted(self.not_equals):
            out.append((A.Binary("==", subject, A.StrLit(s)), False))
        if self.contradictory:
            out.append((A.BoolLit(False), True))
        return out

    def render(self, name):
        out = self.length.render(f"length({name})")
        if self.equals is not None:
            out.append(f"{name} == {_quote(self.equals)}")
        out.extend(f"{name} != {_quote(s)}" for s in sorted(self.not_equals))
        return out


def _chars(s) -> str:
    return "".join(sorted(s))


def _quote(s: str) -> str:
    from pathwise.subjectlang.lexer import escape
    return '"' + escape(s) + '"'


ATOM_FOR_TYPE = {"int": IntAtom, "bool": BoolAtom, "char": CharAtom, "string": StrAtom}


# ---------------------------------------------------------------------- predicates

@dataclass(frozen=True)
class ParamPredicate:
    """Conjunction of atoms keyed by subject. ``params`` fixes the rendering order."""

    params: tuple[str, ...] = ()
    atoms: tuple[tuple[str, object, object], ...] = ()  # (key, subject expr, atom), sorted by key
    empty: bool = False

    @property
    def is_empty(self) -> bool:
        return self.empty

    def atom(self, key: str):
        for k, _, a in self.atoms:
            if k == key:
                return a
        return None

    def with_atom(self, subject, atom) -> "ParamPredicate":
        if self.empty:
            return self
        key = pretty_expr(subject)
        merged = dict((k, (s, a)) for k, s, a in self.atoms)
        if key in merged:
            atom = merged[key][1].intersect(atom)
        merged[key] = (subject, atom)
        if atom.is_empty():
            return ParamPredicate(self.params, (), True)
        return ParamPredicate(self.params, tuple(sorted((k, s, a) for k, (s, a) in merged.items())))

    def holds(self, env: dict) -> bool:
        """Evaluate over concrete parameter values (out-of-range ``charAt`` makes it false)."""
        if self.empty:
            return False
        for _, subject, atom in self.atoms:
            try:
                v = eval_term(subject, env)
            except _TermError:
                return False
            if not atom.holds(v):
                return False
        return True

    def conditions(self) -> list[tuple[object, bool]]:
        if self.empty:
            return [(A.BoolLit(False), True)]
        out = []
        for _, subject, atom in self.atoms:
            out.extend(atom.conditions(subject))
        return out

    def render(self) -> list[str]:
        if self.empty:
            return ["<empty>"]
        rank = {p: i for i, p in enumerate(self.params)}
        items = sorted(self.atoms, key=lambda t: (rank.get(t[0], len(rank)), t[0]))
        out = []
        for key, _, atom in items:
            out.extend(atom.render(key))
        constrained = {k for k, _, _ in self.atoms}
        for p in self.params:
            if p not in constrained and not any(p in _names(s) for _, s, _ in self.atoms):
                out.append(f"{p} unconstrained")
        return out

    def __str__(self) -> str:
        return "{" + ", ".join(self.render()) + "}"


EMPTY = ParamPredicate(empty=True)


def unconstrained(params=()) -> ParamPredicate:
    return ParamPredicate(tuple(params))


def intersect_predicates(preds) -> ParamPredicate:
    """Atom-wise conjunction; :data:`EMPTY` as soon as any subject contradicts."""
    preds = list(preds)
    if not preds:
        return ParamPredicate()
    params = preds[0].params
    out = ParamPredicate(params)
    for p in preds:
        if p.empty:
            return ParamPredicate(params, (), True)
        for _, subject, atom in p.atoms:
            out = out.with_atom(subject, atom)
            if out.empty:
                return out
    return out


def _names(e) -> set[str]:
    return {n.ident for n in A.walk(e) if isinstance(n, A.Name)}


class _TermError(Exception):
    pass


def eval_term(e, env: dict):
    """Evaluate a predicate subject (names, literals, arithmetic and built-ins)."""
    if isinstance(e, A.Name):
        return env[e.ident]
    if isinstance(e, A.LITERALS):
        return None if isinstance(e, A.NullLit) else e.value
    if isinstance(e, A.Unary):
        v = eval_term(e.operand, env)
        return (not v) if e.op == "!" else -v
    if isinstance(e, A.Binary):
        a, b = eval_term(e.left, env), eval_term(e.right, env)
        ops = {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
               "==": lambda: a == b, "!=": lambda: a != b, "<": lambda: a < b, "<=": lambda: a <= b,
               ">": lambda: a > b, ">=": lambda: a >= b}
        if e.op in ops:
            return ops[e.op]()
        if e.op in ("/", "%"):
            if b == 0:
                raise _TermError("division by zero")
            q = abs(a) // abs(b)
            q = q if (a >= 0) == (b >= 0) else -q
            return q if e.op == "/" else a - b * q
        raise _TermError(e.op)
    if isinstance(e, A.Call) and e.receiver is None:
        args = [eval_term(a, env) for a in e.args]
        if e.name == "length":
            return len(args[0])
        if e.name == "charAt":
            s, i = args
            if not 0 <= i < len(s):
                raise _TermError("charAt out of bounds")
            return s[i]
        if e.name == "indexOf":
            return args[0].find(args[1])
        if e.name == "substring":
            s, lo, hi = args
            if not 0 <= lo <= hi <= len(s):
                raise _TermError("substring out of bounds")
            return s[lo:hi]
        if e.name == "concat":
            return args[0] + args[1]
    raise _TermError(f"cannot evaluate {type(e).__name__}")


# ---------------------------------------------------------------------- atomization

TRUE, FALSE, UNSUPPORTED = "true", "false", "unsupported"


@dataclass
class Vocabulary:
    """What may appear as a predicate subject, and which fields are compile-time constants.

    ``vars`` maps subject names (parameters, or fields when deriving hints) to
    their types. ``constants`` maps constant field expressions (printed form) to
    their literal values.
    """

    vars: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)


def fold_constants(e, vocab: Vocabulary):
    """Substitute constant fields and evaluate literal-only sub-expressions."""
    key = pretty_expr(e) if isinstance(e, (A.Name, A.FieldAccess)) else None
    if key is not None and key not in vocab.vars and key in vocab.constants:
        return _literal(vocab.constants[key])
    if isinstance(e, A.Binary):
        e = dataclasses.replace(e, left=fold_constants(e.left, vocab), right=fold_constants(e.right, vocab))
    elif isinstance(e, A.Unary):
        e = dataclasses.replace(e, operand=fold_constants(e.operand, vocab))
    elif isinstance(e, A.Call) and e.receiver is None:
        e = dataclasses.replace(e, args=tuple(fold_constants(a, vocab) for a in e.args))
    else:
        return e
    kids = A.children(e)
    if kids and all(isinstance(k, A.LITERALS) and not isinstance(k, A.NullLit) for k in kids) \
            and (not isinstance(e, A.Call) or e.name in A.BUILTINS):
        try:
            v = eval_term(e, {})
        except _TermError:
            return e  # leave it; the hazard analysis turns it into a contradiction
        except (TypeError, IndexError):
            return e
        return _literal(v, char=isinstance(e, A.Call) and e.name == "charAt")
    return e


def _literal(v, char: bool = False):
    if isinstance(v, bool):
        return A.BoolLit(v)
    if isinstance(v, int):
        return A.IntLit(v)
    if char:
        return A.CharLit(v)
    return A.StrLit(v)


def _linear(e, vocab: Vocabulary):
    """``(coefficients, constant)`` for integer-linear expressions, else None.

    Variables are integer subjects, or ``length(s)`` for a string subject.
    """
    if isinstance(e, A.IntLit):
        return {}, e.value
    if isinstance(e, A.Name) and vocab.vars.get(e.ident) == "int":
        return {e.ident: 1}, 0
    if isinstance(e, A.Call) and e.receiver is None and e.name == "length" \
            and isinstance(e.args[0], A.Name) and vocab.vars.get(e.args[0].ident) == "string":
        return {f"length:{e.args[0].ident}": 1}, 0
    if isinstance(e, A.Unary) and e.op == "-":
        inner = _linear(e.operand, vocab)
        if inner is None:
            return None
        return {k: -v for k, v in inner[0].items()}, -inner[1]
    if isinstance(e, A.Binary) and e.op in ("+", "-"):
        a, b = _linear(e.left, vocab), _linear(e.right, vocab)
        if a is None or b is None:
            return None
        sign = 1 if e.op == "+" else -1
        coeffs = dict(a[0])
        for k, v in b[0].items():
            coeffs[k] = coeffs.get(k, 0) + sign * v
        return {k: v for k, v in coeffs.items() if v}, a[1] + sign * b[1]
    if isinstance(e, A.Binary) and e.op == "*":
        a, b = _linear(e.left, vocab), _linear(e.right, vocab)
        if a is None or b is None:
            return None
        if not a[0]:
            a, b = b, a
        if b[0]:
            return None  # non-linear
        return {k: v * b[1] for k, v in a[0].items() if v * b[1]}, a[1] * b[1]
    return None


def _compare(a, op: str, b) -> bool:
    return {"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _char_subject(e, vocab: Vocabulary) -> bool:
    if isinstance(e, A.Name):
        return vocab.vars.get(e.ident) == "char"
    if isinstance(e, A.Call) and e.receiver is None and e.name == "charAt":
        s, i = e.args
        return (isinstance(s, A.StrLit) or (isinstance(s, A.Name) and vocab.vars.get(s.ident) == "string")) \
            and _linear(i, vocab) is not None
    return False


def atomize(guard, outcome: bool, vocab: Vocabulary):
    """Translate one (guard, outcome) into ``[(subject, atom)]``, TRUE, FALSE or UNSUPPORTED."""
    g = fold_constants(guard, vocab)
    if isinstance(g, A.BoolLit):
        return TRUE if g.value == outcome else FALSE
    if isinstance(g, A.Name) and vocab.vars.get(g.ident) == "bool":
        return [(g, BoolAtom(outcome))]
    if isinstance(g, A.Unary) and g.op == "!":
        return atomize(g.operand, not outcome, vocab)
    if not (isinstance(g, A.Binary) and g.op in COMPARISONS):
        return UNSUPPORTED
    op = g.op if outcome else NEGATE[g.op]
    left, right = g.left, g.right

    # literal on both sides
    if isinstance(left, A.LITERALS) and isinstance(right, A.LITERALS):
        if isinstance(left, A.NullLit) or isinstance(right, A.NullLit):
            return UNSUPPORTED
        return TRUE if _compare(left.value, op, right.value) else FALSE

    # integer-linear comparisons with a single unit-coefficient variable
    la, ra = _linear(left, vocab), _linear(right, vocab)
    if la is not None and ra is not None:
        coeffs = dict(la[0])
        for k, v in ra[0].items():
            coeffs[k] = coeffs.get(k, 0) - v
        coeffs = {k: v for k, v in coeffs.items() if v}
        const = la[1] - ra[1]  # sum(coeffs * vars) + const  op  0
        if not coeffs:
            return TRUE if _compare(const, op, 0) else FALSE
        if len(coeffs) != 1:
            return UNSUPPORTED
        (var, coef), = coeffs.items()
        if coef not in (1, -1):
            return UNSUPPORTED
        if coef == 1:
            rng = _range_for(op, -const)
        else:
            rng = _range_for(FLIP[op], const)
        if var.startswith("length:"):
            name = var.split(":", 1)[1]
            return [(A.Name(name), StrAtom(length=rng))]
        return [(A.Name(var), IntAtom(rng))]

    # normalise: a literal, if any, on the right
    if isinstance(left, A.LITERALS) and not isinstance(right, A.LITERALS):
        left, right, op = right, left, FLIP[op]

    # indexOf(CONST, x) compared with an integer
    if isinstance(left, A.Call) and left.receiver is None and left.name == "indexOf" \
            and isinstance(right, A.IntLit) and isinstance(left.args[0], A.StrLit) \
            and _char_subject(left.args[1], vocab):
        text, k = left.args[0].value, right.value
        firsts = {c: text.index(c) for c in set(text)}
        ok = frozenset(c for c, i in firsts.items() if _compare(i, op, k))
        if _compare(-1, op, k):
            return [(left.args[1], CharAtom(None, frozenset(firsts) - ok))] if ok != frozenset(firsts) else TRUE
        return [(left.args[1], CharAtom(ok))]

    if isinstance(right, A.CharLit) and _char_subject(left, vocab) and op in ("==", "!="):
        c = frozenset(right.value)
        return [(left, CharAtom(c) if op == "==" else CharAtom(None, c))]

    if isinstance(left, A.Name) and isinstance(right, A.StrLit) and op in ("==", "!=") \
            and vocab.vars.get(left.ident) == "string":
        atom = StrAtom(equals=right.value) if op == "==" else StrAtom(not_equals=frozenset({right.value}))
        return [(left, atom)]

    if isinstance(left, A.Name) and isinstance(right, A.BoolLit) and op in ("==", "!=") \
            and vocab.vars.get(left.ident) == "bool":
        return [(left, BoolAtom(right.value if op == "==" else not right.value))]

    return UNSUPPORTED


def hazard_conditions(hazard) -> list[tuple[object, bool]]:
    """Conditions under which a potentially-raising expression does not raise."""
    if isinstance(hazard, A.Binary):
        return [(A.Binary("==", hazard.right, A.IntLit(0)), False)]
    if hazard.name == "charAt":
        s, i = hazard.args
        return [(A.Binary(">=", i, A.IntLit(0)), True),
                (A.Binary("<", i, A.Call(None, "length", (s,))), True)]
    s, lo, hi = hazard.args
    return [(A.Binary(">=", lo, A.IntLit(0)), True), (A.Binary("<=", lo, hi), True),
            (A.Binary("<=", hi, A.Call(None, "length", (s,))), True)]


@dataclass(frozen=True)
class Derivation:
    """Outcome of conjoining conditions: a predicate, plus the guards that fell outside the vocabulary."""

    predicate: ParamPredicate
    unsupported: tuple = ()

    @property
    def resolved(self) -> bool:
        return not self.unsupported


def conjoin(conditions, vocab: Vocabulary, params=()) -> Derivation:
    pred = ParamPredicate(tuple(params))
    unsupported = []
    for guard, outcome in conditions:
        res = atomize(guard, outcome, vocab)
        if res == TRUE:
            continue
        if res == FALSE:
            return Derivation(ParamPredicate(tuple(params), (), True))
        if res == UNSUPPORTED:
            unsupported.append((guard, outcome))
            continue
        for subject, atom in res:
            pred = pred.with_atom(subject, atom)
            if pred.empty:
                return Derivation(pred)
    return Derivation(pred, tuple(unsupported))

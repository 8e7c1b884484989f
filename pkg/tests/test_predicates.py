from __future__ import annotations

import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from pathwise.distill.predicates import (FALSE, UNSUPPORTED, CharAtom, IntRange, ParamPredicate,
                                         StrAtom, Vocabulary, conjoin, intersect_predicates)
from pathwise.subjectlang.ast import Name
from pathwise.subjectlang.parser import parse_expression

WIDE = range(-12, 13)
OPS = ["<", "<=", ">", ">=", "==", "!="]
PY_OPS = {"<": int.__lt__, "<=": int.__le__, ">": int.__gt__, ">=": int.__ge__,
          "==": int.__eq__, "!=": int.__ne__}


def make_range(op: str, k: int) -> IntRange:
    if op in ("<", "<="):
        return IntRange(hi=k, hi_closed=op == "<=")
    if op in (">", ">="):
        return IntRange(lo=k, lo_closed=op == ">=")
    if op == "==":
        return IntRange(lo=k, hi=k)
    return IntRange(excluded=frozenset({k}))


CONSTRAINTS = st.lists(st.tuples(st.sampled_from(OPS), st.integers(-8, 8)), min_size=1, max_size=4)


@settings(max_examples=300, deadline=None)
@given(CONSTRAINTS, CONSTRAINTS)
def test_int_range_intersection_matches_enumeration(a, b):
    ra = ra0 = make_range(*a[0])
    for c in a[1:]:
        ra = ra.intersect(make_range(*c))
    rb = make_range(*b[0])
    for c in b[1:]:
        rb = rb.intersect(make_range(*c))
    both = ra.intersect(rb)
    members = [v for v in WIDE if all(PY_OPS[op](v, k) for op, k in a + b)]
    assert [v for v in WIDE if both.contains(v)] == members
    assert both.is_empty() == (not members)
    assert ra0.intersect(ra0) == ra0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sets(st.sampled_from("ABCDE")) | st.none(), min_size=1, max_size=3),
       st.sets(st.sampled_from("ABCDE")))
def test_char_atoms_intersect_like_sets(allowed_sets, forbidden):
    atom = CharAtom(None, frozenset(forbidden))
    for s in allowed_sets:
        atom = atom.intersect(CharAtom(None if s is None else frozenset(s)))
    expected = set("ABCDEZ") - set(forbidden)
    for s in allowed_sets:
        if s is not None:
            expected &= s
    assert {c for c in "ABCDEZ" if atom.holds(c)} == expected
    assert atom.is_empty() == (not expected and any(s is not None for s in allowed_sets))


def test_string_atoms():
    a = StrAtom(length=IntRange(lo=2)).intersect(StrAtom(equals="ab"))
    assert a.holds("ab") and not a.holds("abc") and not a.is_empty()
    assert StrAtom(equals="a").intersect(StrAtom(equals="b")).is_empty()
    assert StrAtom(length=IntRange(hi=-1)).is_empty()
    assert StrAtom(equals="x", not_equals=frozenset({"x"})).is_empty()


def test_predicate_intersection_goes_empty():
    p = ParamPredicate(("x",)).with_atom(Name("x"), CharAtom(frozenset("A")))
    q = ParamPredicate(("x",)).with_atom(Name("x"), CharAtom(frozenset("B")))
    assert intersect_predicates([p, q]).is_empty
    assert not intersect_predicates([p, p]).is_empty
    assert str(ParamPredicate(("x", "y")).with_atom(Name("x"), CharAtom(frozenset("A")))) == \
        '{x in "A", y unconstrained}'


# ----------------------------------------------------------- guard conjunction

VOCAB = Vocabulary(vars={"x": "int", "y": "int", "s": "string", "c": "char", "b": "bool"},
                   constants={"K": 2})
STRINGS = ["", "A", "B", "AB", "BA", "AAB"]
ENVS = [dict(x=x, y=y, s=s, c=c, b=b) for x, y, s, c, b in
        itertools.product(range(-6, 7), (-1, 0, 3), STRINGS, "AEX", (True, False))]


def _guard(draw):
    kind = draw(st.integers(0, 6))
    k = draw(st.integers(-4, 4))
    op = draw(st.sampled_from(OPS))
    if kind == 0:
        return f"x + {k} {op} K", lambda e: PY_OPS[op](e["x"] + k, 2)
    if kind == 1:
        return f"{k} {op} y - x + y", lambda e: PY_OPS[op](k, e["y"] - e["x"] + e["y"])
    if kind == 2:
        return f"length(s) {op} {k}", lambda e: PY_OPS[op](len(e["s"]), k)
    if kind == 3:
        lit = draw(st.sampled_from(STRINGS))
        eq = draw(st.booleans())
        return f'(s {"==" if eq else "!="} "{lit}")', lambda e: (e["s"] == lit) == eq
    if kind == 4:
        return f'indexOf("AEIOU", c) {op} {k}', lambda e: PY_OPS[op]("AEIOU".find(e["c"]), k)
    if kind == 5:
        return "b", lambda e: e["b"]
    return "c == 'A'", lambda e: e["c"] == "A"


GUARDS = st.lists(st.composite(lambda draw: (_guard(draw), draw(st.booleans())))(), min_size=1, max_size=4)


@settings(max_examples=200, deadline=None)
@given(GUARDS)
def test_conjoin_is_exact_on_supported_guards(guards):
    conditions = [(parse_expression(text), outcome) for (text, _), outcome in guards]
    d = conjoin(conditions, VOCAB, ("x", "y", "s", "c", "b"))
    mixed = any("y - x" in text for (text, _), _ in guards)
    if mixed:
        # two variables in one comparison is outside the vocabulary
        assert not d.resolved or d.predicate.is_empty
        return
    assert d.resolved
    for env in ENVS:
        want = all(fn(env) == outcome for (_, fn), outcome in guards)
        assert d.predicate.holds(env) == want, (env, d.predicate)


def test_literal_only_guards_fold():
    from pathwise.distill.predicates import atomize
    assert atomize(parse_expression("K + 1 == 3"), False, VOCAB) == FALSE
    assert atomize(parse_expression("x * y > 0"), True, VOCAB) == UNSUPPORTED

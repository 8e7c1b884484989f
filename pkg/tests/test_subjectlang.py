from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import project_of
from pathwise.errors import EngineError, ParseError
from pathwise.subjectlang import ast as A
from pathwise.subjectlang import check, execute, parse, pretty
from pathwise.subjectlang.interp import BranchEvent, ExceptionEvent, Interpreter
from pathwise.subjectlang.lexer import KEYWORDS
from pathwise.subjectlang.serial import from_json, to_json

# ------------------------------------------------------------------ round trip

IDENT = st.from_regex(r"[a-z][a-zA-Z0-9_]{0,5}", fullmatch=True).filter(lambda s: s not in KEYWORDS)
CLASS = st.from_regex(r"[A-Z][a-zA-Z0-9]{0,5}", fullmatch=True)
TEXT = st.text(alphabet="abcXYZ \"'\\\n\t", max_size=4)
BIN_OPS = ["||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%"]


def _exprs():
    # the parser folds a minus sign into an integer literal, so that is the canonical form
    leaves = st.one_of(
        st.integers(-99, 99).map(A.IntLit),
        st.booleans().map(A.BoolLit),
        st.sampled_from(list("aZ'\\\n ")).map(A.CharLit),
        TEXT.map(A.StrLit),
        st.just(A.NullLit()),
        IDENT.map(A.Name),
        CLASS.map(A.New),
    )

    def grow(inner):
        args = st.lists(inner, max_size=3).map(tuple)
        return st.one_of(
            st.builds(A.Binary, st.sampled_from(BIN_OPS), inner, inner),
            # the parser folds "-<int>" into a negative literal, so keep that shape out
            st.builds(A.Unary, st.sampled_from(["!", "-"]), inner).map(
                lambda u: A.Unary("-", A.Name("n")) if u.op == "-" and isinstance(u.operand, A.IntLit) else u),
            st.builds(A.FieldAccess, st.one_of(IDENT.map(A.Name), CLASS.map(A.New)), IDENT),
            st.builds(A.Call, st.one_of(st.none(), IDENT.map(A.Name)), IDENT, args),
            st.builds(A.ReflectCall, st.one_of(st.none(), IDENT.map(A.Name)), CLASS, IDENT, args),
        )

    return st.recursive(leaves, grow, max_leaves=8)


EXPRS = _exprs()


def _stmts():
    e = EXPRS
    simple = st.one_of(
        st.builds(A.VarDecl, st.sampled_from(["int", "bool", "string", "Foo"]), IDENT, st.one_of(st.none(), e)),
        st.builds(A.Assign, IDENT.map(A.Name), e),
        st.builds(A.Return, st.one_of(st.none(), e)),
        st.builds(A.ExprStmt, st.builds(A.Call, st.none(), IDENT, st.lists(e, max_size=2).map(tuple))),
        st.builds(A.ReflectSet, st.one_of(st.none(), IDENT.map(A.Name)), CLASS, IDENT, e),
    )

    def grow(inner):
        block = st.lists(inner, max_size=3).map(lambda xs: A.Block(tuple(xs)))
        return st.one_of(
            st.builds(A.If, e, block, st.one_of(st.none(), block)),
            st.builds(A.While, e, block),
        )

    return st.recursive(simple, grow, max_leaves=6)


STMTS = _stmts()


@st.composite
def units(draw):
    name = draw(CLASS)
    body = A.Block(tuple(draw(st.lists(STMTS, max_size=4))))
    params = tuple(A.Param(t, f"p{i}") for i, t in enumerate(draw(st.lists(st.sampled_from(["int", "char"]), max_size=2))))
    method = A.MethodDecl(name, draw(IDENT), params, draw(st.sampled_from(["void", "int"])),
                          draw(st.booleans()), False, draw(st.sampled_from(["public", "private"])), body)
    field = A.FieldDecl(draw(IDENT), "int", draw(st.booleans()), "private", draw(st.one_of(st.none(), st.integers(0, 9).map(A.IntLit))))
    cls = A.ClassDecl(name, draw(st.one_of(st.none(), CLASS)), False, (field,), (method,))
    return A.SourceUnit("gen.sj", (cls,))


@settings(max_examples=150, deadline=None)
@given(units())
def test_pretty_then_parse_is_identity(unit):
    text = pretty(unit)
    again = parse(text, unit.path)
    assert again == unit
    assert pretty(again) == text


@settings(max_examples=100, deadline=None)
@given(units())
def test_json_round_trip(unit):
    assert from_json(to_json(unit)) == unit


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse("class A { public int f( { }", "bad.sj")
    d = info.value.diagnostics[0]
    assert d.code == "SYNTAX_ERROR" and d.path == "bad.sj" and d.span.line == 1


def test_negative_literal_prints_and_parses():
    unit = parse("class A { public static int f() { return -3; } }")
    assert "return -3;" in pretty(unit)


# ------------------------------------------------------------------ checker

def codes(*sources):
    return sorted({d.code for d in check(project_of(*sources)) if d.severity == "error"})


def test_checker_accepts_corpus(corpus_project):
    assert [d for d in check(corpus_project) if d.severity == "error"] == []


@pytest.mark.parametrize("src, code", [
    ("class A { public void f() { B x = null; } }", "UNKNOWN_CLASS"),
    ("class A { public void f() { int x = y; } }", "UNKNOWN_NAME"),
    ("class A { public int f() { return true; } }", "TYPE_MISMATCH"),
    ("class A { public int f() { int x = 1; } }", "MISSING_RETURN"),
    ("class A { public void f() { g(); } }", "UNKNOWN_METHOD"),
    ("class A { private int x; } class B { public void f() { A a = new A(); a.x = 1; } }", "ACCESS_PRIVATE"),
    ("class A { private void g() { } } class B { public void f() { A a = new A(); a.g(); } }", "ACCESS_PRIVATE"),
    ("abstract class A { } class B { public void f() { A a = new A(); } }", "ABSTRACT_INSTANTIATION"),
    ("class A extends B { } class B extends A { }", "CYCLIC_INHERITANCE"),
    ("class A { public void f(int x) { } public void g() { f(1, 2); } }", "ARITY_MISMATCH"),
])
def test_checker_rejects(src, code):
    assert code in codes(src)


def test_reflection_reaches_private_members():
    src = """
    class A { private int x; private int get() { return x; } }
    class T { public static void test() {
        A a = new A();
        reflect set a.A#x = 4;
        int v = reflect call a.A#get();
    } }"""
    assert codes(src) == []
    trace = execute(project_of(src), "T#test()")
    assert trace.outcome == "completed"


def test_concrete_class_must_implement_abstract_methods():
    src = "abstract class A { public abstract int f(); } class B extends A { }"
    assert "UNIMPLEMENTED_ABSTRACT" in codes(src)


# ------------------------------------------------------------------ interpreter

def run_static(body: str, ret: str = "int", extra: str = ""):
    src = f"class A {{ {extra} public static {ret} f() {{ {body} }} }}"
    proj = project_of(src)
    assert [d for d in check(proj) if d.severity == "error"] == []
    return Interpreter(proj).invoke("A#f()", ())


@pytest.mark.parametrize("a, b", [(7, 2), (-7, 2), (7, -2), (-7, -2), (0, 3)])
def test_division_truncates_toward_zero(a, b):
    q = run_static(f"return {a} / {b};").result
    r = run_static(f"return {a} % {b};").result
    assert q == int(a / b)
    assert q * b + r == a


def test_division_by_zero_is_an_exception_event():
    trace = run_static("int z = 0; return 1 / z;")
    assert trace.outcome == "uncaught-exception"
    assert trace.exception.kind == "DIVISION_BY_ZERO"


def test_step_budget():
    trace = Interpreter(project_of("class A { public static void f() { while (true) { } } }"),
                        step_budget=50).invoke("A#f()", ())
    assert trace.exception.kind == "STEP_BUDGET_EXCEEDED"


def test_index_out_of_bounds():
    trace = run_static('return charAt("AB", 2);', "char")
    assert trace.exception.kind == "INDEX_OUT_OF_BOUNDS"


def test_short_circuit_records_only_evaluated_atoms():
    trace = run_static("int x = 0; if (x > 1 && x < 5) { return 1; } return 0;")
    branches = [ev for ev in trace.events if isinstance(ev, BranchEvent)]
    assert [ev.outcome for ev in branches] == [False]


def test_virtual_dispatch_picks_lowest_override():
    src = """
    class A { public int f() { return 1; } public int g() { return f(); } }
    class B extends A { public int f() { return 2; } }
    class C extends B { }"""
    proj = project_of(src)
    for cls, want in (("A", 1), ("B", 2), ("C", 2)):
        assert Interpreter(proj).invoke("A#g()", (), cls).result == want


def test_focal_reached_before_exception():
    src = """
    class A { public static int f(int x) { return 10 / x; } }
    class T { public static void test() { int y = A.f(0); } }"""
    trace = execute(project_of(src), "T#test()", focal="A#f(int)")
    assert trace.focal_reached
    kinds = [type(ev).__name__ for ev in trace.events]
    assert kinds.index("EnterEvent") < kinds.index("ExceptionEvent")
    assert isinstance(trace.events[-1], ExceptionEvent)


def test_run_rejects_non_entry_methods():
    with pytest.raises(EngineError):
        execute(project_of("class A { public int f(int x) { return x; } }"), "A#f(int)")


# ------------------------------------------------------------------ coverage

def test_negative_index_covers_one_contains_outcome(f1_project):
    from pathwise.subjectlang import measure_coverage
    from pathwise.subjectlang.interp import Interpreter
    ref = "Metaphone#contains(string,int)"
    trace = Interpreter(f1_project, focal=ref).invoke(ref, ["AB", -1], None, virtual=False)
    cov = measure_coverage([trace], f1_project, [ref]).methods[ref]
    # five atomic guards, two outcomes each
    assert (len(cov.covered_branch_outcomes), cov.total_branch_outcomes) == (1, 10)
    assert cov.covered_lines == {18, 19}


def test_coverage_of_nothing_is_full():
    from pathwise.subjectlang import measure_coverage
    proj = project_of("class A { public static int f() { return 1; } }")
    report = measure_coverage([], proj, ["A#f()"])
    assert report.branch_pct == 100.0 and report.line_pct == 0.0

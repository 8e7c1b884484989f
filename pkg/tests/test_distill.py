from __future__ import annotations

import pytest

from conftest import F1_CONDITION, F1_CONTAINS, F1_IS_VOWEL
from oracles import domain_inputs
from pathwise.distill import distill, plan_invocation
from pathwise.distill.plan import receiver_candidates
from pathwise.distill.resolve import DELEGATED, RESOLVED
from pathwise.errors import InfeasibleContext
from pathwise.genloop import build_prompt
from pathwise.knowledge.cfg import build_cfg
from pathwise.subjectlang.interp import Interpreter


def test_condition_c0_needs_contains_false(f1_kb):
    ctx = distill(F1_CONDITION, 1, f1_kb)
    assert ctx.invocation.kind == "instance-reflective"
    assert ctx.variables == ()
    (res,) = ctx.resolutions
    assert res.status == RESOLVED and res.callee == F1_CONTAINS
    assert res.chosen_path.index == 0
    assert res.predicate.render() == ["index < 0", "value unconstrained"]


def test_is_vowel_needs_the_private_constant(f1_kb):
    ctx = distill(F1_IS_VOWEL, 0, f1_kb)
    (var,) = ctx.variables
    assert (var.field, var.access, var.is_static, var.set_via) == ("Metaphone.VOWELS", "private", True, "reflect-set")
    assert ctx.obligations_rendered == ("[2] line 32: indexOf(VOWELS, c) != -1 is true",)


def test_invocation_kinds(corpus_kb):
    kinds = {ref: plan_invocation(ref, corpus_kb.facts).kind for ref in
             ("Metaphone#contains(string,int)", "Calc#adjust(int)", "Account#fee(int)", "Account#withdraw(int)")}
    assert kinds == {"Metaphone#contains(string,int)": "static-reflective", "Calc#adjust(int)": "static-direct",
                     "Account#fee(int)": "instance-reflective", "Account#withdraw(int)": "instance-direct"}
    plan = plan_invocation("Container#isFull()", corpus_kb.facts)
    assert plan.receiver_class == "Stack"


def test_receiver_is_switched_when_the_default_cannot_satisfy_a_call(corpus_kb):
    assert [c for _, c in receiver_candidates("Vehicle#status()", corpus_kb.facts)] == ["Bike", "Car"]
    ctx = distill("Vehicle#status()", 2, corpus_kb)
    assert ctx.invocation.receiver_class == "Car" and not ctx.infeasible


def test_contradictory_path_is_infeasible(corpus_kb):
    ctx = distill("Guard#classify(int)", 1, corpus_kb)
    assert ctx.infeasible
    with pytest.raises(InfeasibleContext):
        build_prompt(ctx, "")


def test_contradictory_own_guards_are_infeasible():
    from conftest import project_of
    from pathwise.knowledge import build_kb
    kb = build_kb(project_of(
        "class R { public static int f(int x) { if (x > 2) { if (x < 0) { return 1; } } return 0; } }"))
    flags = [distill("R#f(int)", p.index, kb).infeasible for p in kb.paths_of("R#f(int)")]
    assert flags == [True, False, False]


def test_unsupported_guards_are_delegated(corpus_kb):
    ctx = distill("Vehicle#status()", 1, corpus_kb)
    assert [r.status for r in ctx.resolutions] == [DELEGATED]
    assert ctx.resolutions[0].unresolved


def test_resolved_predicates_are_sound_on_f1(f1_project, f1_kb):
    """Every input satisfying a resolved predicate drives the callee down the chosen path."""
    ctx = distill(F1_CONDITION, 1, f1_kb)
    (res,) = ctx.resolutions
    m = f1_project.method(res.callee)
    cfg = build_cfg(m, f1_project)
    want = [(cfg.node(n).span, o) for n, o in res.chosen_path.obligations]
    interp = Interpreter(f1_project, focal=res.callee, record_statements=False)
    hits = 0
    for args in domain_inputs(f1_project, m):
        env = dict(zip([p.name for p in m.params], args))
        trace = interp.invoke(res.callee, args, None, virtual=False)
        on_path = trace.exception is None and trace.focal_branch_outcomes() == want \
            and res.required_return.admits(trace.result)
        assert res.predicate.holds(env) == on_path, env
        hits += on_path
    assert hits


def test_context_json_is_stable(f1_kb):
    assert distill(F1_CONDITION, 1, f1_kb).dumps() == distill(F1_CONDITION, 1, f1_kb).dumps()


def test_prompt_sections_and_commands(f1_project, f1_kb):
    ctx = distill(F1_IS_VOWEL, 0, f1_kb)
    doc = build_prompt(ctx, f1_kb.focal_source_of(f1_project, F1_IS_VOWEL))
    text = doc.render()
    assert "private bool isVowel(char c)" in text
    for section in ("@persona", "@terminology", "@command", "@rule", "@focal", "@path", "@context"):
        assert section in text
    assert "reflect call receiver.Metaphone#isVowel(...)" in doc.command[1]
    assert "Metaphone.VOWELS (private static string) with `reflect set`" in doc.command[2]
    assert doc.command[3].endswith("there are no dependent methods on this path.")
    c0 = build_prompt(distill(F1_CONDITION, 1, f1_kb), "")
    assert "Metaphone#contains(string,int) must return falsy" in c0.command[3]
    assert "index < 0" in c0.command[3]

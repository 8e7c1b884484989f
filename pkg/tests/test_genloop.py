from __future__ import annotations

import json
import sys
import textwrap

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import F1_CONDITION, F1_IS_VOWEL, project_of
from pathwise.distill import distill
from pathwise.errors import BackendFailure, ConfigError
from pathwise.genloop import (EXHAUSTED, INFEASIBLE, VALID, BruteForceBackend, Domains, ExternalBackend,
                              GenerateRequest, RepairRequest, ScriptedBackend, Unsat, brute_force_generate,
                              build_prompt, compile_candidate, failure_of, run_session, search, validate)
from pathwise.knowledge import build_kb
from pathwise.knowledge.cfg import build_cfg
from pathwise.subjectlang.interp import Interpreter


def test_source(body: str) -> str:
    return "class Test {\n  public static void test() {\n" + textwrap.indent(body, "    ") + "\n  }\n}\n"


test_source.__test__ = False

GOOD_C0 = test_source('Metaphone m = new Metaphone();\nbool r = reflect call m.Metaphone#conditionC0("", -1);')


# ------------------------------------------------------------------ validation

def test_validation_outcomes(f1_project):
    cases = {
        "class Test {": "compile-error",
        "class Other { public static void test() { } }": "compile-error",
        test_source("Metaphone m = new Metaphone();\nbool r = m.conditionC0(\"\", 0);"): "compile-error",
        test_source("int z = 1 / 0;\n" + GOOD_C0.split("\n", 2)[2].rsplit("\n  }", 1)[0]): "exception-before-focal",
        test_source("int z = 1;"): "focal-not-reached",
        GOOD_C0: "valid",
    }
    for src, kind in cases.items():
        assert validate(src, f1_project, F1_CONDITION).kind == kind, src


def test_private_access_is_reported(f1_project):
    out = validate(test_source('Metaphone m = new Metaphone();\nbool r = m.conditionC0("", 0);'),
                   f1_project, F1_CONDITION)
    assert [d.code for d in out.diagnostics] == ["ACCESS_PRIVATE"]


def test_exception_after_focal_entry_is_valid_with_warning(f1_project):
    src = test_source('Metaphone m = new Metaphone();\nbool r = reflect call m.Metaphone#conditionC0("A", 5);')
    out = validate(src, f1_project, F1_CONDITION)
    assert out.valid and "INDEX_OUT_OF_BOUNDS" in out.warning


def test_runaway_test_hits_the_step_budget(f1_project):
    src = test_source("int i = 0;\nwhile (i >= 0) { i = i + 1; }")
    out = validate(src, f1_project, F1_CONDITION, step_budget=1000)
    assert out.kind == "exception-before-focal"
    assert out.trace.exception.kind == "STEP_BUDGET_EXCEEDED"


def test_failure_payloads(f1_project):
    stage, failure = failure_of(validate("class Test {", f1_project, F1_CONDITION))
    assert stage == "syntax" and failure["diagnostics"][0]["code"]
    stage, failure = failure_of(validate(test_source("Metaphone m = new Metaphone();\nint z = 1 / 0;"),
                                         f1_project, F1_CONDITION))
    assert stage == "runtime" and failure["exception"]["kind"] == "DIVISION_BY_ZERO"
    assert failure["preceding_events"][0].startswith("enter Test#test()")


# ------------------------------------------------------------------ brute force

def test_brute_force_covers_every_f1_path(f1_project, f1_kb):
    for ref in (F1_CONDITION, "Metaphone#contains(string,int)", F1_IS_VOWEL):
        cfg = f1_kb.cfg_of(ref)
        for path in f1_kb.paths_of(ref):
            ctx = distill(ref, path.index, f1_kb)
            found = search(ctx, f1_project, Domains.for_project(f1_project))
            assert not isinstance(found, Unsat), (ref, path.index)
            out = validate(brute_force_generate(ctx, f1_project), f1_project, ref)
            assert out.valid
            want = [(cfg.node(n).span, o) for n, o in path.obligations]
            assert out.trace.focal_branch_outcomes() == want


def test_out_of_domain_path_is_unsat():
    proj = project_of("class R { public static int f(int x) { if (x > 100) { return 1; } return 0; } }")
    kb = build_kb(proj)
    ctx = distill("R#f(int)", 0, kb)
    assert isinstance(search(ctx, proj, Domains.for_project(proj)), Unsat)
    assert not isinstance(search(ctx, proj, Domains.for_project(proj, int_max=101)), Unsat)
    session = run_session("R#f(int)", 0, kb, BruteForceBackend(proj), proj)
    assert session.status == INFEASIBLE and session.rounds == []


def test_direct_variant_of_private_members_does_not_compile(corpus_project, corpus_kb):
    for ref in (F1_IS_VOWEL, "Shape#scaled()"):
        ctx = distill(ref, 0, corpus_kb)
        assert validate(brute_force_generate(ctx, corpus_project), corpus_project, ref).valid
        direct = validate(brute_force_generate(ctx, corpus_project, reflective=False), corpus_project, ref)
        assert direct.kind == "compile-error"
        assert {d.code for d in direct.diagnostics} == {"ACCESS_PRIVATE"}


# ------------------------------------------------------------------ sessions

def _broken(k: int) -> ScriptedBackend:
    return ScriptedBackend(["class Test {"] * k + [GOOD_C0])


@pytest.mark.parametrize("k", range(5))
def test_session_recovers_after_k_bad_rounds(f1_project, f1_kb, k):
    s = run_session(F1_CONDITION, 1, f1_kb, _broken(k), f1_project)
    assert s.status == VALID and len(s.rounds) == k + 1
    assert [r.request_kind for r in s.rounds] == ["generate"] + ["repair"] * k
    assert s.test_source == GOOD_C0


def test_session_gives_up_after_max_rounds(f1_project, f1_kb):
    s = run_session(F1_CONDITION, 1, f1_kb, _broken(5), f1_project)
    assert s.status == EXHAUSTED and len(s.rounds) == 5 and s.test_source is None
    s = run_session(F1_CONDITION, 1, f1_kb, _broken(5), f1_project, max_rounds=6)
    assert s.status == VALID


def test_repair_requests_carry_the_failure(f1_project, f1_kb):
    seen = []

    class Recorder(ScriptedBackend):
        def produce(self, request):
            seen.append(request)
            return super().produce(request)

    script = ["class Test {", test_source("int z = 1 / 0;"), GOOD_C0]
    run_session(F1_CONDITION, 1, f1_kb, Recorder(script), f1_project)
    assert [type(r).__name__ for r in seen] == ["GenerateRequest", "RepairRequest", "RepairRequest"]
    assert seen[1].stage == "syntax" and seen[1].prior_candidate == "class Test {"
    assert seen[2].stage == "runtime" and seen[2].failure["exception"]["kind"] == "DIVISION_BY_ZERO"


def test_backend_failure_consumes_a_round(f1_project, f1_kb):
    backend = ScriptedBackend([BackendFailure("down"), GOOD_C0])
    s = run_session(F1_CONDITION, 1, f1_kb, backend, f1_project)
    assert s.status == VALID
    assert [r.outcome.kind for r in s.rounds] == ["backend-failure", "valid"]
    assert s.rounds[1].request_kind == "generate"


def test_infeasible_context_skips_the_backend(corpus_project, corpus_kb):
    s = run_session("Guard#classify(int)", 1, corpus_kb, ScriptedBackend([GOOD_C0]), corpus_project)
    assert s.status == INFEASIBLE and s.rounds == [] and s.prompt is None


# ------------------------------------------------------------------ backends

def test_wire_format(f1_kb):
    prompt = build_prompt(distill(F1_CONDITION, 1, f1_kb), "src")
    wire = GenerateRequest(prompt).to_wire()
    assert wire["kind"] == "generate" and wire["format_version"] == 1
    assert json.loads(json.dumps(wire)) == wire
    assert set(wire["prompt"]) == {"persona", "terminology", "instruction", "payload", "text"}
    assert len(wire["prompt"]["instruction"]["command"]) == 4
    assert wire["prompt"]["payload"]["context"]["focal"] == F1_CONDITION
    rep = RepairRequest(prompt, "x", "runtime", {"exception": None}).to_wire()
    assert rep["failure"]["stage"] == "runtime" and rep["prior_candidate"] == "x"
    with pytest.raises(ValueError):
        RepairRequest(prompt, "x", "runtime", {})
    with pytest.raises(ValueError):
        RepairRequest(prompt, "x", "parse", {"a": 1})


def _stub(tmp_path, body: str):
    script = tmp_path / "stub.py"
    script.write_text(body, encoding="utf-8")
    return [sys.executable, str(script)]


def test_external_backend_round_trip(tmp_path, f1_project, f1_kb):
    answer = tmp_path / "answer.sj"
    answer.write_text(GOOD_C0, encoding="utf-8")
    cmd = _stub(tmp_path, "import json, sys\n"
                          "req = json.load(sys.stdin)\n"
                          "assert req['kind'] == 'generate'\n"
                          f"sys.stdout.write(open({str(answer)!r}).read())\n")
    s = run_session(F1_CONDITION, 1, f1_kb, ExternalBackend(cmd, timeout=30), f1_project)
    assert s.status == VALID


@pytest.mark.parametrize("body, message", [
    ("import time; time.sleep(5)", "timed out"),
    ("pass", "no output"),
    ("import sys; sys.exit(4)", "status 4"),
    ("import sys; sys.stdout.buffer.write(bytes([255, 254]))", "UTF-8"),
])
def test_external_backend_failures(tmp_path, f1_kb, body, message):
    prompt = build_prompt(distill(F1_CONDITION, 1, f1_kb), "src")
    backend = ExternalBackend(_stub(tmp_path, body), timeout=1.0)
    with pytest.raises(BackendFailure, match=message):
        backend.produce(GenerateRequest(prompt))


def test_scripted_backend_from_file(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps({"responses": ["a", "b"]}), encoding="utf-8")
    backend = ScriptedBackend.from_file(path)
    assert backend.responses == ["a", "b"]
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        ScriptedBackend.from_file(path)
    with pytest.raises(ConfigError):
        ExternalBackend("")


def test_no_backend_calls_after_a_valid_round(f1_project, f1_kb):
    calls = []

    class Counting(ScriptedBackend):
        def produce(self, request):
            calls.append(request.round)
            return super().produce(request)

    s = run_session(F1_CONDITION, 1, f1_kb, Counting(["class Test {", GOOD_C0, "class Test {"]), f1_project)
    assert s.status == VALID and calls == [1, 2]


def test_brute_force_is_complete_on_the_corpus(corpus_project, corpus_kb):
    """Every feasible fixture path gets a test whose replay matches the path exactly."""
    backend = BruteForceBackend(corpus_project)
    from pathwise.harness import select_focals
    for ref in select_focals(corpus_kb):
        cfg = corpus_kb.cfg_of(ref)
        for path in corpus_kb.paths_of(ref):
            s = run_session(ref, path.index, corpus_kb, backend, corpus_project)
            if s.status == INFEASIBLE:
                assert s.context.infeasible, (ref, path.index)
                continue
            assert s.status == VALID and len(s.rounds) == 1, (ref, path.index)
            want = [(cfg.node(n).span, o) for n, o in path.obligations]
            assert s.trace.focal_branch_outcomes() == want, (ref, path.index)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, len(GOOD_C0) - 1), st.integers(1, 6))
def test_validity_equivalence_under_mutation(f1_project, start, width):
    """Valid exactly when the candidate checks clean and the focal method is entered."""
    candidate = GOOD_C0[:start] + GOOD_C0[start + width:]
    outcome = validate(candidate, f1_project, F1_CONDITION)
    combined, diags = compile_candidate(candidate, f1_project)
    if diags:
        assert outcome.kind == "compile-error"
        return
    trace = Interpreter(combined, focal=F1_CONDITION).run("Test#test()")
    assert outcome.valid == trace.focal_reached

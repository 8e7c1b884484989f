"""Acceptance criteria, one test per criterion.

Run ``python3 tests/test_acceptance.py`` (or the whole suite) to get the
one-line-per-criterion summary at the end of the pytest output.
"""

from __future__ import annotations

import os
import random
import subprocess
import sys
import time
from pathlib import Path

from conftest import F1_CONDITION, F1_CONTAINS, FIXTURES, project_of
from oracles import domain_inputs, random_method_source, reachable_outcomes, simple_paths
from pathwise.distill import distill, intersect_predicates
from pathwise.distill.plan import concrete_receiver
from pathwise.distill.predicates import IntAtom, IntRange, ParamPredicate
from pathwise.distill.resolve import RESOLVED, candidate_paths_for_return, rank_paths
from pathwise.genloop import (EXHAUSTED, VALID, BruteForceBackend, ScriptedBackend, brute_force_generate,
                              run_session, validate)
from pathwise.harness import RunConfig, run
from pathwise.knowledge import build_kb
from pathwise.knowledge.cfg import BRANCH, build_cfg
from pathwise.knowledge.deps import ReturnConstraint
from pathwise.knowledge.paths import enumerate_paths
from pathwise.subjectlang import Project, measure_coverage, parse
from pathwise.subjectlang.ast import Name
from pathwise.subjectlang.interp import Interpreter

GOOD_C0 = ("class Test {\n  public static void test() {\n    Metaphone m = new Metaphone();\n"
           "    bool r = reflect call m.Metaphone#conditionC0(\"\", -1);\n  }\n}\n")


def _elapsed(start: float) -> float:
    return time.perf_counter() - start


def test_criterion_1_fixture_fidelity():
    start = time.perf_counter()
    project = Project([parse((FIXTURES / "metaphone.sj").read_text(), "metaphone.sj")])
    kb = build_kb(project)
    paths = kb.paths_of(F1_CONTAINS)
    falsy = candidate_paths_for_return(F1_CONTAINS, ReturnConstraint("falsy"), kb)
    top = rank_paths(falsy, kb, F1_CONTAINS)[0]
    (res,) = distill(F1_CONDITION, 1, kb).resolutions
    elapsed = _elapsed(start)

    assert len(paths) == 6
    assert len(falsy) == 4
    first_guard = kb.cfg_of(F1_CONTAINS).node(top.obligations[0][0]).guard
    assert top.index == 0 and top.obligations == ((top.obligations[0][0], True),)
    assert first_guard == parse_guard("index < 0")
    assert res.chosen_path.index == top.index
    assert res.predicate.render() == ["index < 0", "value unconstrained"]
    assert elapsed < 1.0, elapsed


def parse_guard(text: str):
    from pathwise.subjectlang.parser import parse_expression
    return parse_expression(text)


def _random_range(rng: random.Random) -> IntRange:
    lo = rng.choice([None, rng.randint(-8, 8)])
    hi = rng.choice([None, rng.randint(-8, 8)])
    excluded = frozenset(rng.sample(range(-8, 9), rng.randint(0, 2)))
    return IntRange(lo, rng.random() < 0.5, hi, rng.random() < 0.5, excluded)


def test_criterion_2_constraint_intersection():
    start = time.perf_counter()
    p = Name("p")
    ge3 = ParamPredicate(("p",)).with_atom(p, IntAtom(IntRange(lo=3)))
    lt5 = ParamPredicate(("p",)).with_atom(p, IntAtom(IntRange(hi=5, hi_closed=False)))
    both = intersect_predicates([ge3, lt5])
    assert both.render() == ["3 <= p < 5"]
    assert both.atom("p") == IntAtom(IntRange(3, True, 5, False))

    rng = random.Random(20240101)
    domain = range(-8, 9)
    for _ in range(1000):
        a, b = _random_range(rng), _random_range(rng)
        got = {v for v in domain if a.intersect(b).contains(v)}
        want = {v for v in domain if a.contains(v)} & {v for v in domain if b.contains(v)}
        assert got == want, (a, b)
    assert _elapsed(start) < 5.0


def test_criterion_3_oracle_coverage_equivalence():
    start = time.perf_counter()
    result = run(RunConfig(str(FIXTURES)))
    project, kb = result.project, result.kb

    assert len(project.classes) >= 10
    branching = [ref for ref in kb.cfgs if any(n.kind == BRANCH for n in kb.cfg_of(ref).nodes)]
    assert len(branching) >= 30
    assert any(c.is_abstract for c in project.classes.values())
    assert any(m.access == "private" for m in project.methods.values())
    assert any(kb.cfg_of(ref).loops for ref in kb.cfgs)

    mismatches = {}
    for row in result.report.focals:
        ref = row.method
        traces = [s.trace for s in result.sessions if s.focal == ref and s.status == VALID]
        got = measure_coverage(traces, project, [ref]).methods[ref].covered_branch_outcomes
        want = reachable_outcomes(project, ref)
        if got != want:
            mismatches[ref] = (sorted(want - got), sorted(got - want))
    assert not mismatches
    assert _elapsed(start) < 120.0


def test_criterion_4_loop_once_paths():
    start = time.perf_counter()
    rng = random.Random(7)
    checked = loop_free = 0
    while checked < 200:
        src = random_method_source(rng)
        project = project_of(src)
        cfg = build_cfg(project.method("R#f(int)"), project)
        if len(cfg.nodes) > 12 or len(cfg.loops) > 3:
            continue
        checked += 1
        paths = enumerate_paths(cfg)
        assert paths, src
        for p in paths:
            assert len(set(p.node_ids)) == len(p.node_ids), src
        if not cfg.loops:
            loop_free += 1
            assert {tuple(p.node_ids) for p in paths} == simple_paths(cfg), src
    assert loop_free >= 20
    assert _elapsed(start) < 30.0


def _walk(resolutions):
    for r in resolutions:
        yield r
        yield from _walk(r.children)


def test_criterion_5_predicate_soundness(corpus_project, corpus_kb):
    project, kb = corpus_project, corpus_kb
    from pathwise.harness import select_focals
    seen = {}
    for ref in select_focals(kb):
        for p in kb.paths_of(ref):
            ctx = distill(ref, p.index, kb)
            for r in _walk(ctx.resolutions):
                if r.status == RESOLVED:
                    key = (r.callee, r.chosen_path.index, str(r.required_return), str(r.predicate),
                           ctx.invocation.receiver_class)
                    seen.setdefault(key, r)
    assert len(seen) >= 10

    problems = []
    for (callee, _, _, _, receiver), r in seen.items():
        m = project.method(callee)
        if m.is_static:
            runtime_class = None
        elif receiver and project.is_subclass(receiver, m.owner):
            runtime_class = receiver
        else:
            runtime_class = concrete_receiver(m.owner, kb.facts)[1]
        cfg = build_cfg(m, project)
        want = [(cfg.node(n).span, o) for n, o in r.chosen_path.obligations]
        interp = Interpreter(project, focal=callee, record_statements=False)
        sat = sat_ok = violated_ok = 0
        for args in domain_inputs(project, m):
            env = dict(zip([q.name for q in m.params], args))
            trace = interp.invoke(callee, args, runtime_class, virtual=False)
            ok = (trace.exception is None and trace.focal_branch_outcomes() == want
                  and (r.required_return is None or r.required_return.admits(trace.result)))
            if r.predicate.holds(env):
                sat += 1
                sat_ok += ok
            else:
                violated_ok += ok
        # folded child predicates are sufficient but may be stronger than needed
        closed = not r.children
        if sat == 0 or sat_ok != sat or (closed and violated_ok):
            problems.append((callee, r.chosen_path.index, str(r.predicate), sat, sat_ok, violated_ok))
    assert not problems


class _FlakyBruteForce(BruteForceBackend):
    """Broken on the first round for odd-numbered paths, then correct."""

    def produce(self, request):
        if request.round == 1 and request.context.path.index % 2:
            return "class Test {"
        return super().produce(request)


def test_criterion_6_refinement_dynamics(f1_project, f1_kb, corpus_project):
    for k in range(6):
        backend = ScriptedBackend(["class Test {"] * k + [GOOD_C0])
        s = run_session(F1_CONDITION, 1, f1_kb, backend, f1_project)
        if k < 5:
            assert (s.status, len(s.rounds)) == (VALID, k + 1)
        else:
            assert (s.status, len(s.rounds)) == (EXHAUSTED, 5)

    report = run(RunConfig(str(FIXTURES)), corpus_project, _FlakyBruteForce(corpus_project)).report
    curve = report.valid_by_round()
    assert all(a <= b for a, b in zip(curve, curve[1:]))
    assert curve[0] < curve[1] == curve[-1] == report.valid


def test_criterion_7_validity_definition(f1_project):
    broken = "class Test {\n  public static void test() {\n    int x = ;\n  }\n}\n"
    before = GOOD_C0.replace("    Metaphone m", "    int z = 1 / 0;\n    Metaphone m")
    after = GOOD_C0.replace('conditionC0("", -1)', 'conditionC0("A", 5)')
    kinds = [type(validate(src, f1_project, F1_CONDITION)).__name__ for src in (broken, before, after)]
    assert kinds == ["CompileError", "ExceptionBeforeFocal", "Valid"]
    assert validate(after, f1_project, F1_CONDITION).trace.exception is not None


def test_criterion_8_reflection_invariants(corpus_project):
    result = run(RunConfig(str(FIXTURES)), corpus_project)
    project = result.project
    private_focals = private_vars = 0
    for s in result.sessions:
        if s.status != VALID:
            continue
        ctx = s.context
        focal_private = project.method(s.focal).access == "private"
        private = [v for v in ctx.variables if v.access == "private"]
        if not focal_private and not private:
            continue
        private_focals += focal_private
        private_vars += len(private)
        source = s.test_source
        if focal_private:
            assert "reflect call" in source, s.focal
        for v in private:
            assert f"#{v.name} = " in source and "reflect set" in source, (s.focal, v.field)
        assert validate(source, project, s.focal).valid
        direct = validate(brute_force_generate(ctx, project, reflective=False), project, s.focal)
        assert direct.kind == "compile-error", (s.focal, s.path.index)
        assert "ACCESS_PRIVATE" in {d.code for d in direct.diagnostics}
    assert private_focals and private_vars


def _cli_run(out: Path, hash_seed: str) -> None:
    env = dict(os.environ, PYTHONHASHSEED=hash_seed)
    done = subprocess.run([sys.executable, "-m", "pathwise", "generate", str(FIXTURES), "--out", str(out)],
                          capture_output=True, text=True, env=env, timeout=300)
    assert done.returncode == 0, done.stderr


def test_criterion_9_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _cli_run(a, "1")
    _cli_run(b, "2")
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file() and p.name != "timing.json")
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file() and p.name != "timing.json")
    assert files_a == files_b
    assert {"kb.json", "report.json"} <= {str(p) for p in files_a}
    assert any(str(p).startswith("prompts/") for p in files_a)
    assert any(str(p).startswith("tests/") for p in files_a)
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


if __name__ == "__main__":
    import pytest
    sys.exit(pytest.main([__file__, "-q"]))

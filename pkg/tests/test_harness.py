from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from conftest import F1_CONDITION, F1_CONTAINS, F1_IS_VOWEL, FIXTURES
from pathwise.errors import ConfigError, ProjectError
from pathwise.harness import RunConfig, run, select_focals
from pathwise.harness.cli import main
from pathwise.harness.config import BackendSpec
from pathwise.harness.report import RunReport, render
from pathwise.harness.run import load_project, slug


@pytest.fixture
def f1_dir(tmp_path):
    d = tmp_path / "f1"
    d.mkdir()
    shutil.copy(FIXTURES / "metaphone.sj", d / "metaphone.sj")
    return d


def test_default_filter_on_f1(f1_kb):
    assert set(select_focals(f1_kb)) == {F1_CONDITION, F1_CONTAINS, F1_IS_VOWEL}
    assert select_focals(f1_kb, (F1_IS_VOWEL,)) == [F1_IS_VOWEL]
    with pytest.raises(ConfigError):
        select_focals(f1_kb, ("Nope#x()",))


def test_slug():
    assert slug("A#m(int,string)") == "A.m-int-string"
    assert slug("A#m()") == "A.m"


def test_f1_run_writes_artifacts(f1_dir, tmp_path):
    out = tmp_path / "out"
    result = run(RunConfig(str(f1_dir), str(out)))
    report = result.report
    assert report.generated == report.valid == 12 and report.valid_rate == 1.0
    assert report.coverage["branch_pct"] == 100.0
    for name in ("kb.json", "sessions.json", "report.json", "timing.json"):
        assert (out / name).is_file()
    assert len(list((out / "tests").iterdir())) == 12
    assert (out / "prompts" / "Metaphone.conditionC0-string-int.path1.txt").is_file()
    assert set(json.loads((out / "timing.json").read_text())) == {"extract", "distill", "generate", "validate", "total"}


def test_empty_project(tmp_path):
    (tmp_path / "p").mkdir()
    result = run(RunConfig(str(tmp_path / "p")))
    assert result.report.focals == [] and result.report.valid_rate == 0.0
    assert main(["generate", str(tmp_path / "p"), "--out", str(tmp_path / "o")]) == 0


def test_all_broken_backend(f1_dir, tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(["class Test {"]), encoding="utf-8")
    cfg = RunConfig(str(f1_dir), backend=BackendSpec("scripted", file=str(script)))
    report = run(cfg).report
    assert report.valid == 0 and report.generated == 12
    assert all(s.status == "exhausted" and s.rounds == 5 for f in report.focals for s in f.sessions)
    assert report.valid_by_round() == [0] * 5


def test_report_round_trip_and_table(f1_dir):
    report = run(RunConfig(str(f1_dir))).report
    again = RunReport.from_json(json.loads(render(report)))
    assert render(again) == render(report)
    table = render(report, "table").splitlines()
    assert table[0].split() == ["focal", "paths", "run", "valid", "invalid", "skipped"]
    assert table[-2].split() == ["TOTAL", "12", "12", "12", "0", "0"]
    assert table[-1].startswith("valid rate 100.00% (12/12)")


def test_parallel_run_matches_serial(corpus_project):
    serial = run(RunConfig(str(FIXTURES)), corpus_project).report
    parallel = run(RunConfig(str(FIXTURES), parallelism=4), corpus_project).report
    assert render(serial) == render(parallel)


def test_project_scope_counts_everything(corpus_project):
    focal = run(RunConfig(str(FIXTURES), focal_filter=(F1_IS_VOWEL,)), corpus_project).report
    project = run(RunConfig(str(FIXTURES), focal_filter=(F1_IS_VOWEL,), coverage_scope="project"),
                  corpus_project).report
    assert list(focal.coverage["methods"]) == [F1_IS_VOWEL]
    assert project.coverage["total_branches"] > focal.coverage["total_branches"]


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig("p", max_rounds=0)
    with pytest.raises(ConfigError):
        RunConfig("p", focal_filter="some")
    with pytest.raises(ConfigError):
        RunConfig.from_json({"project_dir": "p", "colour": "red"})
    with pytest.raises(ConfigError):
        BackendSpec("scripted")
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"project_dir": "p", "max_rounds": 2}), encoding="utf-8")
    cfg = RunConfig.load(path, max_rounds=3, parallelism=None)
    assert cfg.max_rounds == 3 and RunConfig.from_json(cfg.to_json()) == cfg


def test_broken_project_is_a_project_error(tmp_path):
    (tmp_path / "bad.sj").write_text("class A { public int f() { return true; } }", encoding="utf-8")
    with pytest.raises(ProjectError) as info:
        load_project(tmp_path)
    assert info.value.diagnostics


# ------------------------------------------------------------------ CLI

def test_cli_exit_codes(f1_dir, tmp_path, capsys):
    assert main(["paths", str(f1_dir), "--method", "contains(string,int)"]) == 0
    paths = json.loads(capsys.readouterr().out)
    assert len(paths["paths"]) == 6
    (tmp_path / "bad").mkdir()
    (tmp_path / "bad" / "x.sj").write_text("class {", encoding="utf-8")
    assert main(["analyze", str(tmp_path / "bad")]) == 2
    assert main(["paths", str(f1_dir), "--method", "nothing()"]) == 3
    assert main(["distill", str(f1_dir), "--method", F1_CONDITION, "--path", "99"]) == 3
    assert main(["generate", str(f1_dir), "--max-rounds", "0"]) == 3
    assert main(["report", str(tmp_path / "nowhere")]) == 3
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 3


def test_cli_generate_then_report(f1_dir, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["generate", str(f1_dir), "--out", str(out), "--format", "json"]) == 0
    first = capsys.readouterr().out
    assert main(["report", str(out), "--format", "json"]) == 0
    assert capsys.readouterr().out == first
    assert main(["analyze", str(f1_dir), "--out", str(tmp_path / "kb.json")]) == 0
    assert main(["distill", str(f1_dir), "--method", F1_CONDITION, "--path", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["focal"] == F1_CONDITION


def test_module_entry_point(f1_dir):
    done = subprocess.run([sys.executable, "-m", "pathwise", "generate", str(f1_dir), "--format", "table"],
                          capture_output=True, text=True, timeout=120)
    assert done.returncode == 0 and "TOTAL" in done.stdout


def test_filter_soundness(corpus_kb):
    from pathwise.knowledge.cfg import BRANCH
    for ref in select_focals(corpus_kb):
        assert any(n.kind == BRANCH for n in corpus_kb.cfg_of(ref).nodes)


def test_coverage_is_recomputable_from_artifacts(tmp_path, corpus_project):
    """Re-running the persisted tests reproduces the reported coverage."""
    from pathwise.genloop import validate
    from pathwise.harness.report import coverage_json
    from pathwise.subjectlang import measure_coverage
    out = tmp_path / "run"
    report = run(RunConfig(str(FIXTURES), str(out)), corpus_project).report
    traces = []
    for f in report.focals:
        for s in f.sessions:
            if s.test_file is not None:
                outcome = validate((out / s.test_file).read_text(encoding="utf-8"), corpus_project, f.method)
                assert outcome.valid
                traces.append(outcome.trace)
    again = measure_coverage(traces, corpus_project, [f.method for f in report.focals])
    assert coverage_json(again) == report.coverage


def _combined_prompts(run_dir) -> str:
    parts = []
    for p in sorted((run_dir / "prompts").iterdir()):
        parts.append(f"=== {p.name}\n{p.read_text(encoding='utf-8')}")
    return "\n".join(parts)


def test_corpus_golden_files(tmp_path, corpus_project, golden):
    out = tmp_path / "run"
    run(RunConfig(str(FIXTURES), str(out)), corpus_project)
    golden("corpus_report.json", (out / "report.json").read_text(encoding="utf-8").replace(str(FIXTURES), "<fixtures>"))
    golden("corpus_prompts.txt", _combined_prompts(out))

from __future__ import annotations

import os
import re
from importlib.resources import files
from pathlib import Path

import pytest

from pathwise.harness.run import load_project
from pathwise.knowledge import build_kb
from pathwise.subjectlang import Project, parse

FIXTURES = files("pathwise") / "fixtures"
F1_CONTAINS = "Metaphone#contains(string,int)"
F1_CONDITION = "Metaphone#conditionC0(string,int)"
F1_IS_VOWEL = "Metaphone#isVowel(char)"


def project_of(*sources: str) -> Project:
    return Project([parse(src, f"unit{i}.sj") for i, src in enumerate(sources)])


@pytest.fixture(scope="session")
def f1_project() -> Project:
    return Project([parse((FIXTURES / "metaphone.sj").read_text(), "metaphone.sj")])


@pytest.fixture(scope="session")
def f1_kb(f1_project):
    return build_kb(f1_project)


@pytest.fixture(scope="session")
def corpus_project() -> Project:
    return load_project(str(FIXTURES))


@pytest.fixture(scope="session")
def corpus_kb(corpus_project):
    return build_kb(corpus_project)


GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def golden():
    """Compare text with a stored golden file. Set PATHWISE_UPDATE_GOLDEN=1 to rewrite it."""

    def check(name: str, text: str):
        path = GOLDEN / name
        if os.environ.get("PATHWISE_UPDATE_GOLDEN") == "1":
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        assert path.exists(), f"missing golden file {name}"
        assert text == path.read_text(encoding="utf-8"), f"output differs from golden file {name}"

    return check


# ------------------------------------------------------------------ acceptance summary

CRITERIA = {
    1: "fixture fidelity of the running example",
    2: "constraint intersection",
    3: "oracle coverage equivalence",
    4: "loop-once path enumeration",
    5: "predicate soundness",
    6: "refinement loop dynamics",
    7: "validity definition",
    8: "reflection invariants",
    9: "determinism",
}
_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None:
        return
    n = int(m.group(1))
    if report.failed:
        _results[n] = "FAIL"
    elif report.when == "call" and report.passed:
        _results.setdefault(n, "PASS")
    elif report.skipped:
        _results.setdefault(n, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        terminalreporter.write_line(f"criterion {n}: {_results.get(n, 'NOT RUN'):<7} {title}")

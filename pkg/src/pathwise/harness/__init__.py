"""Pipeline orchestration, focal selection, reporting and the command line."""

from pathwise.harness.config import BackendSpec, RunConfig
from pathwise.harness.report import FocalRow, RunReport, SessionRow, render
from pathwise.harness.run import RunResult, load_project, run
from pathwise.harness.select import select_focals

__all__ = ["BackendSpec", "FocalRow", "RunConfig", "RunReport", "RunResult", "SessionRow", "load_project",
           "render", "run", "select_focals"]

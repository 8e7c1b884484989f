# %% [markdown]
# # A full run over the fixture corpus
#
# The harness selects focal methods that branch and depend on other methods
# or fields, generates one test per path and reports validity and coverage.
# The same run is available as `pathwise generate <dir> --out <run-dir>`.

# %%
import json
import tempfile
from importlib.resources import files
from pathlib import Path

from pathwise.harness import RunConfig, run
from pathwise.harness.report import render

fixtures = str(files("pathwise") / "fixtures")
out = Path(tempfile.mkdtemp(prefix="pathwise-run-"))
result = run(RunConfig(fixtures, str(out)))

# %%
print(render(result.report, "table"))

# %% [markdown]
# ## What was written
#
# The run directory holds the knowledge-base snapshot, one prompt and one test
# per path, the session log, the report and a separate timing file.

# %%
for p in sorted(out.rglob("*"))[:12]:
    print(p.relative_to(out))
print(json.loads((out / "timing.json").read_text()))

# %% [markdown]
# ## The skipped path
#
# `Guard#classify` has a path that needs `positive(n)` to return true and
# then false for the same `n`. Resolving the two calls together exposes the
# contradiction, so the path is reported as infeasible instead of being sent
# to the backend.

# %%
for f in result.report.focals:
    for s in f.sessions:
        if s.status != "valid":
            print(f.method, s.path, s.status, "-", s.reason)

# %% [markdown]
# # From one path to one test
#
# The phonetic-encoder fragment in the fixture corpus is the running example.
# `conditionC0` is private and calls two private helpers; one of its paths
# only runs when `contains(value, index)` returns false. This script walks
# that single path through every stage of the pipeline.

# %%
from importlib.resources import files

from pathwise.distill import distill
from pathwise.distill.context import expand_temps
from pathwise.genloop import BruteForceBackend, run_session
from pathwise.knowledge import build_kb
from pathwise.subjectlang import Project, parse
from pathwise.subjectlang.printer import pretty_expr

source = (files("pathwise") / "fixtures" / "metaphone.sj").read_text()
project = Project([parse(source, "metaphone.sj")])
kb = build_kb(project)

# %% [markdown]
# ## Paths of the dependent method
#
# `contains` has six loop-once paths. Each one is the list of branch outcomes
# it commits to.

# %%
contains = "Metaphone#contains(string,int)"
cfg = kb.cfg_of(contains)
for path in kb.paths_of(contains):
    steps = [f"{pretty_expr(expand_temps(cfg.node(n).guard, cfg))} is {'true' if o else 'false'}" for n, o in path.obligations]
    print(f"path {path.index}: " + "; ".join(steps))

# %% [markdown]
# ## Distilling the focal path
#
# Path 1 of `conditionC0` needs `contains` to return false. The simplest
# falsy path of `contains` is the early return, which gives the predicate
# below. Nothing else from the class ends up in the context.

# %%
focal = "Metaphone#conditionC0(string,int)"
context = distill(focal, 1, kb)
print(context.invocation)
for res in context.resolutions:
    print(res.callee, "must return", res.required_return, "->", res.predicate)

# %% [markdown]
# ## Generating and validating
#
# The deterministic brute-force backend stands in for a language model. It
# searches small value domains, so the session finishes in one round.

# %%
session = run_session(focal, 1, kb, BruteForceBackend(project), project)
print(session.prompt.command[3])
print()
print(session.test_source)
print("status:", session.status, "after", len(session.rounds), "round(s)")

# %% [markdown]
# # The generate, validate, repair loop
#
# A backend that keeps answering with broken code shows how the loop feeds
# failures back. Round 1 is a generate request; every later round is a repair
# request carrying the previous candidate and what went wrong with it.

# %%
import json
from importlib.resources import files

from pathwise.genloop import ScriptedBackend, run_session
from pathwise.knowledge import build_kb
from pathwise.subjectlang import Project, parse

source = (files("pathwise") / "fixtures" / "metaphone.sj").read_text()
project = Project([parse(source, "metaphone.sj")])
kb = build_kb(project)
focal = "Metaphone#conditionC0(string,int)"

syntax_error = "class Test {"
# Compiles, but throws before the focal method is entered.
throws_early = """class Test {
  public static void test() {
    int zero = 0;
    int boom = 1 / zero;
  }
}
"""
# Private focal, so the call has to go through reflection.
good = """class Test {
  public static void test() {
    Metaphone m = new Metaphone();
    bool r = reflect call m.Metaphone#conditionC0("", -1);
  }
}
"""

# %% [markdown]
# ## A recording backend
#
# Wrapping the scripted backend keeps every request so the repair payloads
# can be inspected afterwards.

# %%
requests = []


class Recording(ScriptedBackend):
    def produce(self, request):
        requests.append(request)
        return super().produce(request)


session = run_session(focal, 1, kb, Recording([syntax_error, throws_early, good]), project)
for rnd in session.rounds:
    print(rnd.index, rnd.request_kind, rnd.outcome.kind)

# %%
for req in requests[1:]:
    print(json.dumps(req.to_wire()["failure"], indent=2))

# %% [markdown]
# ## Running out of rounds
#
# With five broken answers the session stops at the default budget of five
# rounds and reports the path as exhausted.

# %%
stuck = run_session(focal, 1, kb, ScriptedBackend([syntax_error]), project)
print(stuck.status, len(stuck.rounds))

"""Structured prompt: persona, terminology and a four-step instruction block."""

from __future__ import annotations

import json
from dataclasses import dataclass

from pathwise.errors import InfeasibleContext
from pathwise.subjectlang import ast as A

PERSONA = (
    "You write unit tests for programs in a small class-based language with single "
    "inheritance, private and public members, static fields and a reflection facility. "
    "Your tests drive one method along one specific control-flow path."
)

TERMINOLOGY = (
    ("Focal method", "the method under test; the generated test must call it."),
    ("CFG path", "one walk from the entry of the focal method to its exit, written as the "
                 "outcome every branch condition on the walk must take."),
    ("Dependent method", "a method called by the focal method whose return value decides a "
                         "branch on the path."),
    ("Dependent variable", "a field read by a branch condition on the path; its value must be "
                           "arranged before the focal method runs."),
    ("Reflection", "`reflect call recv.Class#m(args)`, `reflect call Class#m(args)`, "
                   "`reflect set recv.Class#f = v;` and `reflect set Class#f = v;` reach private "
                   "members from outside their class."),
)

RULES = (
    "Write exactly one class named Test whose entry point is `public static void test()`.",
    "Call the focal method; do not re-implement or copy its logic.",
    "Use the reflect constructs for every private method or field you touch.",
    "Instantiate classes with `new C()`; constructors take no arguments.",
    "Reply with source code only.",
)


@dataclass(frozen=True)
class PromptDocument:
    persona: str
    terminology: tuple[tuple[str, str], ...]
    command: tuple[str, str, str, str]
    rules: tuple[str, ...]
    focal_source: str
    obligations: tuple[str, ...]
    context_json: str

    def render(self) -> str:
        lines = ["@persona", self.persona, "", "@terminology"]
        lines += [f"- {term}: {text}" for term, text in self.terminology]
        lines += ["", "@instruction", "@command"]
        lines += [f"{i}. {step}" for i, step in enumerate(self.command, 1)]
        lines += ["@rule"]
        lines += [f"- {rule}" for rule in self.rules]
        lines += ["", "@focal", self.focal_source, "", "@path"]
        lines += [f"- {o}" for o in self.obligations]
        lines += ["", "@context", self.context_json.rstrip("\n"), ""]
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"persona": self.persona,
                "terminology": [{"term": t, "definition": d} for t, d in self.terminology],
                "instruction": {"command": list(self.command), "rules": list(self.rules)},
                "payload": {"focal_source": self.focal_source, "obligations": list(self.obligations),
                            "context": json.loads(self.context_json)},
                "text": self.render()}


def _invocation_step(ctx) -> str:
    plan = ctx.invocation
    owner, sig = A.split_ref(ctx.focal)
    name = A.sig_name(sig)
    receiver = ""
    if plan.receiver_recipe != "none":
        receiver = f"Create the receiver with `{plan.receiver_class} receiver = new {plan.receiver_class}();`. "
    forms = {
        "static-direct": f"call it directly as `{owner}.{name}(...)`.",
        "static-reflective": f"it is private and static, so call it as `reflect call {owner}#{name}(...)`.",
        "instance-direct": f"call it as `receiver.{name}(...)`; dispatch lands on {plan.dispatch_target}.",
        "instance-reflective": f"it is private, so call it as `reflect call receiver.{owner}#{name}(...)`.",
    }
    return f"Invoke the focal method {ctx.focal}. {receiver}The method is {plan.kind}: {forms[plan.kind]}"


def _variables_step(ctx) -> str:
    if not ctx.variables:
        return "Set dependent variables: no variables to set."
    parts = []
    for v in ctx.variables:
        how = "with `reflect set`" if v.set_via == "reflect-set" else "by direct assignment"
        scope = "static" if v.is_static else "instance"
        text = f"{v.field} ({v.access} {scope} {v.declared_type}) {how}"
        if v.hint is not None:
            text += " so that " + " and ".join(v.hint.render(v.name))
        parts.append(text)
    return "Set dependent variables: " + "; ".join(parts) + "."


def _resolution_text(r, depth: int = 0) -> list[str]:
    callee = r.callee
    need = str(r.required_return) if r.required_return is not None else "a value satisfying the guard"
    head = f"{callee} must return {need}"
    if r.status == "resolved":
        body = ", ".join(r.predicate.render())
        out = [f"{head}: choose arguments with {body}."]
    elif r.status == "unsatisfiable":
        out = [f"{head}: no arguments can achieve this ({r.reason})."]
    else:
        out = [f"{head}: work out arguments so that " + "; ".join(r.unresolved or (r.reason,)) + "."]
        if r.predicate is not None and not r.predicate.empty and r.predicate.atoms:
            out[-1] = out[-1][:-1] + f" (already known: {', '.join(r.predicate.render())})."
    for c in r.children:
        out += ["  " + line for line in _resolution_text(c, depth + 1)]
    return out


def _constraints_step(ctx) -> str:
    if not ctx.resolutions:
        return "Satisfy dependent-method constraints: there are no dependent methods on this path."
    lines = []
    for r in ctx.resolutions:
        lines += _resolution_text(r)
    return "Satisfy dependent-method constraints: " + " ".join(line.strip() for line in lines)


def build_prompt(context, focal_source: str) -> PromptDocument:
    if context.infeasible:
        raise InfeasibleContext(f"{context.focal} path {context.path.index}: {context.reason}")
    command = (
        "Analyze the focal method and the path below; every listed condition must take the "
        "stated outcome, in order.",
        _invocation_step(context),
        _variables_step(context),
        _constraints_step(context),
    )
    return PromptDocument(PERSONA, TERMINOLOGY, command, RULES, focal_source,
                          tuple(context.obligations_rendered), context.dumps())

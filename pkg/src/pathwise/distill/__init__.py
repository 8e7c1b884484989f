"""Distillation: invocation plans, variable requirements and dependent-method resolution."""

from pathwise.distill.context import DistilledContext, distill
from pathwise.distill.plan import (InvocationPlan, VariableRequirement, collect_variable_requirements,
                                   plan_invocation)
from pathwise.distill.predicates import (EMPTY, IntRange, ParamPredicate, intersect_predicates,
                                         unconstrained)
from pathwise.distill.resolve import (ResolutionResult, candidate_paths_for_return,
                                      derive_param_predicate, rank_paths, resolve_dependent_method)

__all__ = [
    "DistilledContext", "distill", "InvocationPlan", "VariableRequirement",
    "collect_variable_requirements", "plan_invocation", "EMPTY", "IntRange", "ParamPredicate",
    "intersect_predicates", "unconstrained", "ResolutionResult", "candidate_paths_for_return",
    "derive_param_predicate", "rank_paths", "resolve_dependent_method",
]

"""Knowledge extraction: type facts, CFGs, loop-once paths, dependencies and the KB store."""

from pathwise.knowledge.cfg import Cfg, CfgEdge, CfgNode, build_cfg
from pathwise.knowledge.deps import (DependentCall, DependentVariable, PathDependencies,
                                     ReturnConstraint, collect_dependencies)
from pathwise.knowledge.facts import TypeFacts, extract_type_facts
from pathwise.knowledge.kb import KnowledgeBase, build_kb, dumps_kb, load_kb, save_kb
from pathwise.knowledge.paths import CfgPath, PathList, enumerate_paths, path_problems

__all__ = [
    "Cfg", "CfgEdge", "CfgNode", "build_cfg", "DependentCall", "DependentVariable",
    "PathDependencies", "ReturnConstraint", "collect_dependencies", "TypeFacts",
    "extract_type_facts", "KnowledgeBase", "build_kb", "dumps_kb", "load_kb", "save_kb",
    "CfgPath", "PathList", "enumerate_paths", "path_problems",
]

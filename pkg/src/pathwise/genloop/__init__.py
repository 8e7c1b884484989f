"""Prompt construction, generator backends, validation and the repair loop."""

from pathwise.genloop.backends import (BruteForceBackend, Capability, ExternalBackend, GenerateRequest,
                                       RepairRequest, ScriptedBackend, failure_of)
from pathwise.genloop.bruteforce import Domains, Unsat, brute_force_generate, emit_test, search
from pathwise.genloop.prompt import PromptDocument, build_prompt
from pathwise.genloop.session import (DEFAULT_MAX_ROUNDS, EXHAUSTED, INFEASIBLE, VALID, RefinementSession,
                                      Round, run_session)
from pathwise.genloop.validate import (BackendError, CompileError, ExceptionBeforeFocal, FocalNotReached,
                                       Valid, compile_candidate, validate)

__all__ = [
    "BackendError", "BruteForceBackend", "Capability", "CompileError", "DEFAULT_MAX_ROUNDS", "Domains",
    "EXHAUSTED", "ExceptionBeforeFocal", "ExternalBackend", "FocalNotReached", "GenerateRequest",
    "INFEASIBLE", "PromptDocument", "RefinementSession", "RepairRequest", "Round", "ScriptedBackend",
    "Unsat", "VALID", "Valid", "brute_force_generate", "build_prompt", "compile_candidate", "emit_test",
    "failure_of", "run_session", "search", "validate",
]

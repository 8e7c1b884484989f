"""Exception types. Each carries a short machine ``code``."""

from __future__ import annotations


class PathwiseError(Exception):
    code = "ERROR"


class ParseError(PathwiseError):
    """Raised by :func:`parse`; ``diagnostics`` holds at least one error."""

    code = "SYNTAX_ERROR"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class NoSuchMethod(PathwiseError, LookupError):
    code = "NO_SUCH_METHOD"


class NotFound(PathwiseError, KeyError):
    code = "NOT_FOUND"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class AbstractMethodError(PathwiseError, ValueError):
    code = "ABSTRACT_METHOD"


class VersionMismatch(PathwiseError, ValueError):
    code = "VERSION_MISMATCH"


class MalformedInput(PathwiseError, ValueError):
    code = "MALFORMED_INPUT"


class NoConcreteReceiver(PathwiseError):
    code = "NO_CONCRETE_RECEIVER"


class InfeasibleContext(PathwiseError, ValueError):
    code = "INFEASIBLE_CONTEXT"


class BackendFailure(PathwiseError):
    code = "BACKEND_FAILURE"


class ConfigError(PathwiseError, ValueError):
    code = "CONFIG_ERROR"


class EngineError(PathwiseError, RuntimeError):
    """Interpreter invariant broken: the program should have been rejected by check()."""

    code = "ENGINE_ERROR"


class ProjectError(PathwiseError):
    """The project under test does not parse or check; ``diagnostics`` lists why."""

    code = "PROJECT_ERROR"

    def __init__(self, message: str, diagnostics=()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)

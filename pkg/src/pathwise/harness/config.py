"""Run configuration: a JSON file whose keys mirror :class:`RunConfig`."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Optional, Union

from pathwise.errors import ConfigError

FILTERS = ("all", "branching-and-dependent")
BACKENDS = ("brute-force", "scripted", "external")
SCOPES = ("focal", "project")
DOMAIN_KEYS = ("int_min", "int_max", "chars", "max_string_length")


@dataclass(frozen=True)
class BackendSpec:
    kind: str = "brute-force"
    file: Optional[str] = None  # scripted
    command: Optional[str] = None  # external
    timeout: float = 120.0

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ConfigError(f"unknown backend {self.kind!r}; expected one of {', '.join(BACKENDS)}")
        if self.kind == "scripted" and not self.file:
            raise ConfigError("the scripted backend needs a script file")
        if self.kind == "external" and not self.command:
            raise ConfigError("the external backend needs a command")
        if not isinstance(self.timeout, (int, float)) or self.timeout <= 0:
            raise ConfigError("backend timeout must be a positive number")

    def to_json(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


@dataclass(frozen=True)
class RunConfig:
    project_dir: str
    output_dir: Optional[str] = None
    focal_filter: Union[str, tuple[str, ...]] = "branching-and-dependent"
    backend: BackendSpec = field(default_factory=BackendSpec)
    max_rounds: int = 5
    path_cap: int = 256
    recursion_depth: int = 3
    domains: dict = field(default_factory=dict)
    parallelism: int = 1
    coverage_scope: str = "focal"

    def __post_init__(self):
        if isinstance(self.focal_filter, list):
            object.__setattr__(self, "focal_filter", tuple(self.focal_filter))
        if isinstance(self.focal_filter, str) and self.focal_filter not in FILTERS:
            raise ConfigError(f"unknown focal filter {self.focal_filter!r}")
        if isinstance(self.backend, dict):
            object.__setattr__(self, "backend", _backend(self.backend))
        for name in ("max_rounds", "path_cap", "recursion_depth", "parallelism"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.coverage_scope not in SCOPES:
            raise ConfigError(f"coverage_scope must be one of {', '.join(SCOPES)}")
        unknown = set(self.domains) - set(DOMAIN_KEYS)
        if unknown:
            raise ConfigError(f"unknown domain keys: {', '.join(sorted(unknown))}")

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "project_dir" not in data:
            raise ConfigError("config needs project_dir")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path, **overrides) -> "RunConfig":
        """Read a config file; keyword arguments that are not None win over the file."""
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_json(data)

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["backend"] = self.backend.to_json()
        if isinstance(self.focal_filter, tuple):
            out["focal_filter"] = list(self.focal_filter)
        return out


def _backend(data: dict) -> BackendSpec:
    unknown = set(data) - {f.name for f in dataclasses.fields(BackendSpec)}
    if unknown:
        raise ConfigError(f"unknown backend keys: {', '.join(sorted(unknown))}")
    return BackendSpec(**data)

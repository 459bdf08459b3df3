"""
Experiment routing - parameter schemas, per-module routers and the registry
that dispatches an ExperimentConfig to its pipeline.
"""
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from src.config import ExperimentConfig
from src.errors import ConfigError
from src.parallel import Seed
from src.results import ResultTable

logger = logging.getLogger(__name__)

REQUIRED = object()


# --- Value parsers ---

def _number_list(cast: Callable[[str], Any]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise ValueError("empty list")
        return [cast(item) for item in items]
    return parse


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


PARSERS: dict[str, Callable[[str], Any]] = {
    "int": int,
    "float": float,
    "str": str.strip,
    "bool": _bool,
    "ints": _number_list(int),
    "floats": _number_list(float),
}


@dataclass(frozen=True)
class Param:
    """One config key: its type and default (REQUIRED when it has none)."""

    kind: str
    default: Any = REQUIRED
    help: str = ""

    @property
    def required(self) -> bool:
        return self.default is REQUIRED

    def parse(self, key: str, text: str) -> Any:
        try:
            return PARSERS[self.kind](text)
        except ValueError as e:
            raise ConfigError(f"invalid value for '{key}': {text!r} ({e})", key=key) from None


@dataclass(frozen=True)
class RunContext:
    """Everything a pipeline needs besides its parameters."""

    seed: Seed
    threads: int = 1
    rank_threshold: float = 1e-5
    dump_dir: Path | None = None

    def artifact_path(self, name: str) -> Path | None:
        """Where a raw artifact goes, or None when dumping is off."""
        return None if self.dump_dir is None else Path(self.dump_dir) / name


Pipeline = Callable[[dict[str, Any], RunContext], ResultTable]


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    params: dict[str, Param]
    pipeline: Pipeline

    @property
    def required_keys(self) -> list[str]:
        return [k for k, p in self.params.items() if p.required]

    def resolve(self, raw: dict[str, str]) -> dict[str, Any]:
        """Parse raw strings, fill defaults; unknown and missing keys are rejected."""
        unknown = sorted(set(raw) - set(self.params))
        if unknown:
            raise ConfigError(f"unknown key '{unknown[0]}' for experiment '{self.name}'", key=unknown[0])
        resolved = {}
        for key, param in self.params.items():
            if key in raw:
                resolved[key] = param.parse(key, raw[key])
            elif param.required:
                raise ConfigError(f"missing required key '{key}' for experiment '{self.name}'", key=key)
            else:
                resolved[key] = param.default
        return resolved


class Router:
    """Collects the experiments of one module."""

    def __init__(self, name: str):
        self.name = name
        self.experiments: dict[str, Experiment] = {}

    def experiment(self, name: str, description: str, **params: Param) -> Callable[[Pipeline], Pipeline]:
        def register(fn: Pipeline) -> Pipeline:
            if name in self.experiments:
                raise ValueError(f"experiment '{name}' registered twice in router '{self.name}'")
            self.experiments[name] = Experiment(name, description, dict(params), fn)
            return fn
        return register


@dataclass
class Registry:
    """All routers, keyed by experiment tag."""

    experiments: dict[str, Experiment] = field(default_factory=dict)

    def include_router(self, router: Router) -> None:
        for name, exp in router.experiments.items():
            if name in self.experiments:
                raise ValueError(f"experiment '{name}' already registered")
            self.experiments[name] = exp
        logger.debug(f"Included router '{router.name}' ({len(router.experiments)} experiments)")

    def get(self, name: str) -> Experiment:
        try:
            return self.experiments[name]
        except KeyError:
            raise ConfigError(f"unknown experiment '{name}'", key="experiment") from None

    def names(self) -> list[str]:
        return sorted(self.experiments)

    def resolve(self, config: ExperimentConfig) -> tuple[Experiment, dict[str, Any]]:
        exp = self.get(config.experiment)
        return exp, exp.resolve(config.parameters)


def format_param(value: Any) -> str:
    """Metadata text for a resolved parameter; lists come back comma-joined."""
    if isinstance(value, list):
        return ",".join(format_param(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)

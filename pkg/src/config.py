"""
Configuration module - process settings from environment variables and
experiment settings from flat key = value files.
"""
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from src.errors import ConfigError

load_dotenv()


def _get_bool(key: str, default: bool = False) -> bool:
    """Parse boolean from env var (accepts true/false/1/0)."""
    val = os.getenv(key, str(default)).lower()
    return val in ("true", "1", "yes")


def _get_int(key: str, default: int) -> int:
    """Parse integer from env var."""
    raw = os.getenv(key, str(default))
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{key} must be an integer, got {raw!r}") from None


def _get_float(key: str, default: float) -> float:
    """Parse float from env var."""
    raw = os.getenv(key, repr(default))
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{key} must be a number, got {raw!r}") from None


@dataclass(frozen=True)
class Config:
    """Immutable process configuration loaded at startup."""

    # Worker pool
    threads: int

    # Output
    results_dir: str
    log_dir: str
    log_level: str

    # Numerics
    rank_threshold: float

    # Keep stack traces on stderr instead of just the log file
    verbose_errors: bool


def load_config() -> Config:
    """Load and validate configuration from environment."""
    threads = _get_int("SIM_THREADS", 1)
    if threads < 1:
        raise ValueError("SIM_THREADS must be at least 1")

    rank_threshold = _get_float("RANK_THRESHOLD", 1e-5)
    if not 0.0 < rank_threshold < 1.0:
        raise ValueError("RANK_THRESHOLD must lie in (0, 1)")

    return Config(
        threads=threads,
        results_dir=os.getenv("RESULTS_DIR", "./results"),
        log_dir=os.getenv("LOG_DIR", "./logs"),
        log_level=os.getenv("LOG_LEVEL", "INFO").upper(),
        rank_threshold=rank_threshold,
        verbose_errors=_get_bool("VERBOSE_ERRORS", False),
    )


# --- Experiment config files ---

@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment request: tag, raw parameter text and seed."""

    experiment: str
    parameters: dict[str, str] = field(default_factory=dict)
    seed: int = 0


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """
    Parse flat `key = value` text. Lines starting with '#' are comments.
    The keys `experiment` (required) and `seed` (default 0) are lifted out.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'", key=key)
        values[key] = value

    experiment = values.pop("experiment", None)
    if not experiment:
        raise ConfigError(f"{source}: missing required key 'experiment'", key="experiment")

    seed_raw = values.pop("seed", "0")
    try:
        seed = int(seed_raw)
    except ValueError:
        raise ConfigError(f"{source}: seed must be an integer, got {seed_raw!r}", key="seed") from None

    return ExperimentConfig(experiment=experiment, parameters=values, seed=seed)


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Read and parse an experiment config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_config_text(text, source=str(path))

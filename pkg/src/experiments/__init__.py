"""
Experiments package - one router per family, assembled into a registry.
"""
import logging
import time
from pathlib import Path

from src import __version__
from src.config import ExperimentConfig
from src.experiments import correlation, decontamination, rank, rates
from src.experiments.router import Experiment, Registry, RunContext, format_param
from src.results import ResultTable

logger = logging.getLogger(__name__)


def build_registry() -> Registry:
    registry = Registry()
    registry.include_router(rank.router)
    registry.include_router(decontamination.router)
    registry.include_router(correlation.router)
    registry.include_router(rates.router)
    return registry


registry = build_registry()


def list_experiments() -> list[Experiment]:
    return [registry.get(name) for name in registry.names()]


def run_experiment(config: ExperimentConfig, threads: int = 1, rank_threshold: float = 1e-5,
                   dump_dir: str | Path | None = None) -> ResultTable:
    """
    Resolve the config (rejecting unknown or missing keys before any work),
    run the pipeline and stamp the table with everything needed to re-run it.
    The result does not depend on `threads` or on `dump_dir`.
    """
    exp, params = registry.resolve(config)
    ctx = RunContext(seed=config.seed, threads=threads, rank_threshold=rank_threshold,
                     dump_dir=Path(dump_dir) if dump_dir is not None else None)
    logger.info(f"Running {exp.name} (seed={config.seed}, threads={threads})")

    started = time.perf_counter()
    table = exp.pipeline(params, ctx)
    runtime = time.perf_counter() - started

    metadata = {
        "experiment": exp.name,
        "seed": str(config.seed),
        "version": __version__,
        "rank_threshold": format_param(rank_threshold),
    }
    metadata.update({f"param.{key}": format_param(value) for key, value in params.items()})
    metadata.update(table.metadata)
    table.metadata = metadata
    logger.info(f"Finished {exp.name}: {len(table.rows)} rows in {runtime:.1f}s")
    return table

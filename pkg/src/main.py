"""
Massive MIMO experiment runner - Entry point.
Runs with `python -m src.main run|list|selftest`.
"""
import argparse
import logging
import logging.handlers
import sys
from dataclasses import replace
from pathlib import Path

from src import texts
from src.config import Config, load_config, load_experiment_config
from src.errors import ConfigError, SimulationError
from src.experiments import list_experiments, run_experiment
from src.experiments.router import format_param
from src.results import write_csv

logger = logging.getLogger(__name__)

_logging_ready = False


def setup_logging(config: Config) -> None:
    """Console plus rotating file log, configured once per process."""
    global _logging_ready
    if _logging_ready:
        return

    log_dir = Path(config.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, config.log_level, logging.INFO))

    file_handler = logging.handlers.RotatingFileHandler(
        log_dir / "simulator.log",
        maxBytes=5 * 1024 * 1024,  # 5 MB per file
        backupCount=3,
        encoding="utf-8",
    )
    file_handler.setLevel(logging.DEBUG)

    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    console_handler.setFormatter(formatter)
    file_handler.setFormatter(formatter)

    logging.basicConfig(level=logging.DEBUG, handlers=[console_handler, file_handler])
    _logging_ready = True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.main", description=texts.PROG_DESCRIPTION)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help=texts.RUN_HELP)
    run.add_argument("config", help=texts.CONFIG_ARG_HELP)
    run.add_argument("--out", default=None, help=texts.OUT_HELP)
    run.add_argument("--seed", type=int, default=None, help=texts.SEED_HELP)
    run.add_argument("--threads", type=int, default=None, help=texts.THREADS_HELP)
    run.add_argument("--dump", default=None, metavar="DIR", help=texts.DUMP_HELP)

    sub.add_parser("list", help=texts.LIST_HELP)
    sub.add_parser("selftest", help=texts.SELFTEST_HELP)
    return parser


# --- Commands ---

def cmd_run(args: argparse.Namespace, config: Config) -> int:
    try:
        exp_config = load_experiment_config(args.config)
        if args.seed is not None:
            exp_config = replace(exp_config, seed=args.seed)
        threads = args.threads if args.threads is not None else config.threads
        if threads < 1:
            raise ConfigError("--threads must be at least 1", key="threads")

        table = run_experiment(exp_config, threads=threads, rank_threshold=config.rank_threshold,
                               dump_dir=args.dump)
        out = Path(args.out) if args.out else Path(config.results_dir) / f"{exp_config.experiment}-seed{exp_config.seed}.csv"
        write_csv(table, out)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(texts.CONFIG_ERROR.format(error=e), file=sys.stderr)
        return 1
    except (SimulationError, OSError) as e:
        logger.error(f"Run failed: {e}", exc_info=config.verbose_errors)
        print(texts.RUNTIME_ERROR.format(error=e), file=sys.stderr)
        return 2
    except Exception as e:
        logger.critical(f"Fatal error: {e}", exc_info=True)
        print(texts.UNEXPECTED_ERROR.format(error=e), file=sys.stderr)
        return 2

    print(texts.RUN_DONE.format(rows=len(table.rows), path=out))
    return 0


def cmd_list() -> int:
    for exp in list_experiments():
        defaults = ", ".join(
            f"{key}={format_param(param.default)}" for key, param in exp.params.items() if not param.required
        )
        print(texts.LIST_ENTRY.format(
            name=exp.name,
            description=exp.description,
            required=", ".join(exp.required_keys) or texts.NO_REQUIRED,
            defaults=defaults,
        ))
    return 0


def cmd_selftest() -> int:
    from src.selftest import run_selftest

    results = run_selftest()
    for name, error in results:
        if error is None:
            print(texts.SELFTEST_PASS.format(name=name))
        else:
            print(texts.SELFTEST_FAIL.format(name=name, error=error))
    passed = sum(1 for _, error in results if error is None)
    print(texts.SELFTEST_SUMMARY.format(passed=passed, total=len(results)))
    return 0 if passed == len(results) else 2


def cli_main(argv: list[str] | None = None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        config = load_config()
    except ValueError as e:
        print(texts.CONFIG_ERROR.format(error=e), file=sys.stderr)
        return 1
    setup_logging(config)

    if args.command == "run":
        return cmd_run(args, config)
    if args.command == "list":
        return cmd_list()
    return cmd_selftest()


if __name__ == "__main__":
    try:
        sys.exit(cli_main())
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(2)

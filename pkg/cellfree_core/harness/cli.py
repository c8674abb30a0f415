"""``cellfree`` command line: run, sweep and oracle subcommands.

Exit codes: 0 on success, 1 for configuration or usage errors, 2 when a run
fails (simulation error, unwritable output, oracle mismatch).
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from ..__version__ import version_string
from ..config.app_config import ConfigError, ScenarioConfig
from ..config.environment import Environment
from ..core.errors import SimulationError
from ..infrastructure.logging import configure_logging
from .experiment import run_experiment, run_sweep
from .oracles import run_oracles
from .results import FORMATS, emit_results

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

EXTENSIONS = {"csv": "csv", "json": "json", "sqlite": "db"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"Expected a comma-separated list of integers, got '{text}'")
    if not values:
        raise ConfigError("Expected at least one value")
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML scenario file (default: $CELLFREE_CONFIG)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output path (default: cellfree-results.<ext>)")
    parser.add_argument("--format", choices=FORMATS, default="csv")
    parser.add_argument("--strategies", help="comma-separated subset of sc,wc,nc")
    parser.add_argument(
        "--desk-scale", action="store_true", help="apply the reduced desk preset"
    )
    parser.add_argument("--workers", type=int, help="process-pool size")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cellfree", description="Multi-CPU cell-free MIMO simulator")
    parser.add_argument("--version", action="version", version=version_string())
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one configuration")
    _add_common(run)

    sweep = commands.add_parser("sweep", help="grid over number of users and CPUs")
    _add_common(sweep)
    sweep.add_argument("--users", help="e.g. 8,12,16")
    sweep.add_argument("--cpus", help="e.g. 1,2,3,4")

    oracle = commands.add_parser("oracle", help="run the brute-force cross-checks")
    oracle.add_argument("--seed", type=int, default=0)
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    overrides: Dict[str, Any] = {
        "master_seed": args.seed,
        "strategies": args.strategies,
        "workers": args.workers or Environment.workers(default=0) or None,
    }
    return ScenarioConfig.load(
        path=args.config or Environment.config_path(),
        preset="desk" if args.desk_scale else None,
        overrides=overrides,
    )


def _output_path(args: argparse.Namespace) -> str:
    return args.out or f"cellfree-results.{EXTENSIONS[args.format]}"


def _run(args: argparse.Namespace) -> int:
    config = load_config(args)
    if args.command == "sweep":
        users = _int_list(args.users) if args.users else None
        cpus = _int_list(args.cpus) if args.cpus else None
        table = run_sweep(config, users=users, cpus=cpus)
    else:
        table = run_experiment(config)
    emit_results(table, _output_path(args), args.format)
    return EXIT_OK


def _oracle(args: argparse.Namespace) -> int:
    results = run_oracles(args.seed)
    for result in results:
        status = "ok" if result.passed else "MISMATCH"
        print(f"{result.name:<24} {status:<8} {result.detail}")
    return EXIT_OK if all(result.passed for result in results) else EXIT_RUNTIME


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        try:
            configure_logging(args.log_level)
        except ValueError as e:
            raise ConfigError(str(e))
        if args.command == "oracle":
            return _oracle(args)
        return _run(args)
    except ConfigError as e:
        print(f"cellfree: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError) as e:
        logger.debug("Run failed", exc_info=True)
        print(f"cellfree: run failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

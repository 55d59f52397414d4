"""
Command-Line Interface for Prior Translation Runs

This module implements the command router: it parses the command line, builds
the run configuration and dispatches to the run service or the standalone
kappa sweep.

Key features:
- run: replicated prior translation with artifacts per replicate
- sweep-kappa: recompute lambda* for a kappa grid from an existing frontier.csv
- validate: report every configuration violation without running anything

Classes:
- PbboCli: builds the argument parser and routes each subcommand to its handler

Exit codes:
    0 success, 1 run failure (any replicate failed), 2 configuration failure.

Usage:
    python main.py run --config config/r2_gaussian.yaml --replicates 3 --seed 7
    python main.py sweep-kappa out/replicate_000/frontier.csv --kappa 0.1,0.5,1
    python main.py validate --config config/survival.yaml --set optimizer.n_bo=50
"""
import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

from constants.pbbo_constants import DEFAULT_KAPPA_GRID
from models.problem import build_problem
from services.config_manager import ConfigError, ConfigManager
from services.objectives import kappa_sweep
from services.run_service import run_replicates
from utils.artifact_utils import read_frontier, write_csv

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_RUN_FAILURE, EXIT_CONFIG_FAILURE = 0, 1, 2
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def parse_kappas(text: str) -> List[float]:
    try:
        kappas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"kappa grid must be comma-separated numbers, got '{text}'") from e
    if not kappas or any(not k > 0 for k in kappas):
        raise argparse.ArgumentTypeError(f"every kappa must be > 0, got '{text}'")
    return kappas


class PbboCli:
    """
    Command router for prior translation.

    Attributes:
        parser (argparse.ArgumentParser): Top-level parser with one subparser per command.
        handlers (Dict[str, Callable]): Command name -> handler returning an exit code.

    Methods:
        setup_handlers(): Registers the subcommands and their options.
        run_command(args): Runs replicated prior translation.
        sweep_kappa(args): Re-selects lambda* from a frontier file.
        validate(args): Prints every configuration violation.
        run(argv): Parses argv and dispatches; returns the exit code.
    """

    def __init__(self):
        self.parser = argparse.ArgumentParser(prog="pbbo", description="Translate elicited predictive targets into priors.")
        self.handlers: Dict[str, Callable[[argparse.Namespace], int]] = {}
        self.setup_handlers()

    def setup_handlers(self):
        config_options = argparse.ArgumentParser(add_help=False)
        config_options.add_argument("--config", help="YAML run configuration (defaults apply when omitted)")
        config_options.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                                    help="override any configuration key by dotted path; repeatable")

        commands = self.parser.add_subparsers(dest="command", required=True)

        run = commands.add_parser("run", parents=[config_options], help="run prior translation")
        run.add_argument("--seed", type=int, help="root seed (run.seed)")
        run.add_argument("--replicates", type=int, help="number of replicates (run.replicates)")
        run.add_argument("--out", help="output directory (run.out)")
        run.add_argument("--jobs", type=int, help="parallel replicates (run.jobs)")
        self.handlers["run"] = self.run_command

        sweep = commands.add_parser("sweep-kappa", help="recompute lambda* over a kappa grid from frontier.csv")
        sweep.add_argument("frontier", help="path to a frontier.csv artifact")
        sweep.add_argument("--kappa", type=parse_kappas, default=list(DEFAULT_KAPPA_GRID),
                           help="comma-separated kappa grid")
        sweep.add_argument("--out", help="output sweep CSV (default: sweep.csv beside the frontier)")
        self.handlers["sweep-kappa"] = self.sweep_kappa

        validate = commands.add_parser("validate", parents=[config_options], help="report configuration violations")
        self.handlers["validate"] = self.validate

    def _config_manager(self, args: argparse.Namespace) -> ConfigManager:
        manager = ConfigManager(args.config)
        flags = {"seed": "run.seed", "replicates": "run.replicates", "out": "run.out", "jobs": "run.jobs"}
        manager.apply_overrides(args.overrides)
        for flag, key in flags.items():
            value = getattr(args, flag, None)
            if value is not None:
                manager.set_value(key, value)
        return manager

    def run_command(self, args: argparse.Namespace) -> int:
        try:
            manager = self._config_manager(args)
            run_cfg = manager.run_config()
            problem = build_problem(run_cfg.raw)
        except ConfigError as e:
            print(str(e), file=sys.stderr)
            return EXIT_CONFIG_FAILURE
        except ValueError as e:
            logger.error("could not build the problem: %s", e)
            print(f"invalid configuration: {e}", file=sys.stderr)
            return EXIT_CONFIG_FAILURE

        os.makedirs(run_cfg.out, exist_ok=True)
        file_handler = logging.FileHandler(os.path.join(run_cfg.out, "pbbo.log"))
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(file_handler)
        try:
            outcomes = run_replicates(run_cfg, problem)
        finally:
            logging.getLogger().removeHandler(file_handler)
            file_handler.close()
        return EXIT_OK if all(o.ok for o in outcomes) else EXIT_RUN_FAILURE

    def sweep_kappa(self, args: argparse.Namespace) -> int:
        try:
            front = read_frontier(args.frontier)
        except (OSError, ValueError) as e:
            logger.error("cannot read frontier: %s", e)
            print(str(e), file=sys.stderr)
            return EXIT_RUN_FAILURE
        sweep = kappa_sweep(front, args.kappa)
        out = args.out or os.path.join(os.path.dirname(args.frontier), "sweep.csv")
        write_csv(sweep.to_frame(), out)
        for kappa, idx in zip(sweep.kappas, sweep.selected):
            print(f"kappa={kappa:g}: point {idx} " + ", ".join(f"{n}={v:.6g}" for n, v in zip(front.names, front.lam[idx])))
        return EXIT_OK

    def validate(self, args: argparse.Namespace) -> int:
        try:
            violations = self._config_manager(args).validate()
        except ConfigError as e:
            violations = e.violations
        for violation in violations:
            print(violation)
        if violations:
            return EXIT_CONFIG_FAILURE
        print("configuration is valid")
        return EXIT_OK

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        args = self.parser.parse_args(argv)
        return self.handlers[args.command](args)

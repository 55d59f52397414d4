"""
PBBO Prior Translation

This script runs the command-line tool that translates elicited predictive
targets into hyperparameters of a prior.

The main components of the system are:
1. PbboCli: Parses the command line and routes run, sweep-kappa and validate
2. ConfigManager: Merges the YAML run configuration over defaults and validates it
3. Problem registry: Builds the survival, R^2 and Preece-Baines problems
4. pbbo_run: CRS2 start followed by multi-objective Bayesian optimisation batches
5. Run service: Runs replicates and writes their artifacts

Usage:
    python main.py run --config config/r2_gaussian.yaml --out out/r2
    python main.py validate --config config/survival.yaml

Note:
    Each run also writes its log to <out>/pbbo.log. Set PBBO_OUTPUT_DIR to
    change the default output directory.
"""

import logging
import os
import sys
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)

# Set the logging level for sklearn and joblib to WARNING
for noisy in ("sklearn", "joblib"):
    logging.getLogger(noisy).setLevel(logging.WARNING)

from cli.pbbo_cli import PbboCli


def main():
    sys.exit(PbboCli().run())


if __name__ == '__main__':
    main()

from __future__ import annotations

import argparse

from ..config import MODES, VERSION
from ..config.models import LOG_LEVELS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Optimal BIC exploration schedules, audits and simulations")
    parser.add_argument("--config", type=str, default=None, help="JSON run config (defaults to the built-in example prior)")
    parser.add_argument("--mode", choices=MODES, default=None, help="Override the config's mode")
    parser.add_argument("--out", type=str, default=None, help="Output directory for artifacts")
    parser.add_argument("--seed", type=int, default=None, help="Unsigned 64-bit simulation seed")
    parser.add_argument("--reps", type=int, default=None, help="Monte-Carlo replications")
    parser.add_argument("--tol", type=float, default=None, help="Audit tolerance")
    parser.add_argument("--horizon", type=int, default=None, help="Number of agents T")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="Console log level")
    parser.add_argument("--print-default-config", action="store_true", help="Print the built-in example config and exit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    return parser

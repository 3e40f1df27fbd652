"""
MESQ - Command Line Entry Point

    python -m mesq verify --suite su11 --n 3 --cutoff 12
    python -m mesq sweep --param lambda --from 0 --to 1 --steps 21 --observables var_collective_X
    python -m mesq evolve --from 0 --to 2 --steps 11 --n 4 --observables scale_sumP
    python -m mesq state --n 2 --label 0,0 --cutoff 4

Exit status: 0 when every check passes, 1 when a check fails (the report is
still written), 2 for usage, argument and envelope errors.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from mesq import __version__
from mesq.config import config, load_config_file
from mesq.core.base import ArgumentError, MesqError, NumericError, RangeError, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

# Flags a config file may set, per command (dest names)
CONFIG_KEYS: Dict[str, List[str]] = {
    "verify": ["suite", "n", "cutoff", "tol", "seed", "json"],
    "sweep": ["param", "start", "stop", "steps", "observables", "n", "beta_chi", "csv", "json", "max_workers"],
    "evolve": ["start", "stop", "steps", "observables", "n", "beta_chi", "csv", "json", "max_workers"],
    "state": ["n", "label", "variant", "cutoff", "r", "format", "json"],
}
# file keys that differ from dest names
KEY_ALIASES = {"from": "start", "to": "stop"}


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value file; explicit flags override it")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--n", type=int, help="number of modes")


def _sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--from", dest="start", type=float, help="first grid value")
    parser.add_argument("--to", dest="stop", type=float, help="last grid value")
    parser.add_argument("--steps", type=int, help="grid points (>= 2)")
    parser.add_argument("--observables", help="comma separated observable names")
    parser.add_argument("--beta-chi", dest="beta_chi", type=float, help="pairwise coupling for t sweeps")
    parser.add_argument("--csv", help="CSV output path")
    parser.add_argument("--json", help="optional JSON copy of the table")
    parser.add_argument("--max-workers", dest="max_workers", type=int, help="thread pool size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesq", description="Multimode entangled states and squeezing checks")
    parser.add_argument("--version", action="version", version=f"mesq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run a verification suite")
    _common(verify)
    verify.add_argument("--suite", help="matrices, su11, bch, eigen, entangle, squeeze, hamiltonian, completeness, all")
    verify.add_argument("--cutoff", type=int, help="Fock cutoff d per mode")
    verify.add_argument("--tol", type=float, help="tolerance for residual checks without a fixed tolerance")
    verify.add_argument("--seed", type=int, help="seed for random labels and generators")
    verify.add_argument("--json", help="report path")

    sweep = sub.add_parser("sweep", help="sweep lambda, r or t")
    _common(sweep)
    sweep.add_argument("--param", help="lambda, r or t")
    _sweep_flags(sweep)

    evolve = sub.add_parser("evolve", help="sweep in time t (alias of sweep --param t)")
    _common(evolve)
    _sweep_flags(evolve)

    state = sub.add_parser("state", help="dump an entangled state")
    _common(state)
    state.add_argument("--label", help="comma separated label values (p,chi_2,...) or (chi,p_2,...)")
    state.add_argument("--variant", help="p_chi or chi_p")
    state.add_argument("--cutoff", type=int, help="Fock cutoff for the ideal coefficients")
    state.add_argument("--r", type=float, help="squeezing; when given the regularized Gaussian is dumped")
    state.add_argument("--format", help="json")
    state.add_argument("--json", help="dump path")
    return parser


def apply_config_file(args: argparse.Namespace) -> argparse.Namespace:
    """Fill flags left unset from the --config file."""
    if not args.config:
        return args
    allowed = set(CONFIG_KEYS[args.command]) | {"log_level"}
    for key, raw in load_config_file(args.config).items():
        dest = KEY_ALIASES.get(key, key)
        if dest not in allowed:
            raise UsageError(f"unknown config key {key!r} for command {args.command}")
        if getattr(args, dest, None) is not None:
            continue
        setattr(args, dest, _coerce(dest, raw))
    return args


def _coerce(dest: str, raw: str):
    ints = {"n", "cutoff", "seed", "steps", "max_workers"}
    floats = {"tol", "start", "stop", "beta_chi", "r"}
    try:
        if dest in ints:
            return int(raw)
        if dest in floats:
            return float(raw)
    except ValueError as e:
        raise UsageError(f"config key {dest!r}: {e}") from e
    return raw


def configure_logging(level: Optional[str]) -> None:
    level_name = (level or config.LOG_LEVEL).upper()
    numeric = getattr(logging, level_name, None)
    if not isinstance(numeric, int):
        raise UsageError(f"unknown log level {level!r}")
    logging.basicConfig(level=numeric, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config_file(args)
        configure_logging(args.log_level)
        if args.command == "verify":
            from mesq.cli.verify import run_verify
            return run_verify(args)
        if args.command in ("sweep", "evolve"):
            from mesq.cli.sweep import run_sweep
            return run_sweep(args)
        from mesq.cli.state import run_state
        return run_state(args)
    except (UsageError, RangeError, ArgumentError) as e:
        print(f"mesq: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as e:
        logger.error(f"numeric failure: {e}")
        print(f"mesq: numeric failure: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except MesqError as e:
        print(f"mesq: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

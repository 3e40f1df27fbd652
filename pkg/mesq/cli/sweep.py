"""
MESQ - sweep / evolve commands
"""

import argparse
import logging
from pathlib import Path

from mesq.config import config
from mesq.core.base import UsageError
from mesq.models.report_models import SweepParameter
from mesq.services.export_service import write_csv, write_json
from mesq.services.sweep_service import SweepService

logger = logging.getLogger(__name__)


def run_sweep(args: argparse.Namespace) -> int:
    param = SweepParameter.T.value if args.command == "evolve" else args.param
    if param is None:
        raise UsageError("sweep needs --param (lambda, r or t)")
    for flag, value in (("--from", args.start), ("--to", args.stop), ("--steps", args.steps)):
        if value is None:
            raise UsageError(f"sweep needs {flag}")

    names = [name.strip() for name in (args.observables or "").split(",") if name.strip()]
    service = SweepService(max_workers=args.max_workers)
    table = service.sweep(
        param,
        args.start,
        args.stop,
        args.steps,
        observables=names,
        n=args.n if args.n is not None else 2,
        beta_chi=args.beta_chi if args.beta_chi is not None else 1.0,
    )

    out = Path(args.csv) if args.csv else config.REPORT_DIR / f"sweep_{table.parameter.value}.csv"
    write_csv(table, out)
    if args.json:
        write_json(table, args.json)
    for name, slope in table.log_slopes.items():
        print(f"{name}: log-slope {slope if slope is None else format(slope, '.6f')}")
    print(f"{len(table.rows)} rows -> {out}")
    return 0

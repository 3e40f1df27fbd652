"""
MESQ - verify command
"""

import argparse
import logging
from pathlib import Path

from mesq.config import config
from mesq.core.base import UsageError
from mesq.models.report_models import Suite
from mesq.services.export_service import write_json
from mesq.services.verification_service import VerificationService

logger = logging.getLogger(__name__)


def run_verify(args: argparse.Namespace) -> int:
    try:
        suite = Suite(args.suite or Suite.ALL.value)
    except ValueError as e:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(s.value for s in Suite)}") from e

    n = args.n if args.n is not None else 2
    service = VerificationService(tol=args.tol, seed=args.seed)
    report = service.run(suite, n=n, cutoff=args.cutoff)

    out = Path(args.json) if args.json else config.REPORT_DIR / f"verify_{suite.value}.json"
    write_json(report, out)

    for check in report.failures:
        print(f"FAIL {check.name}: {check.value:.3e} > {check.tolerance:.1e}  [{check.provenance}]")
    for note in report.notes:
        print(f"note: {note}")
    status = "passed" if report.passed else "FAILED"
    print(f"{suite.value}: {len(report.checks)} checks, {len(report.failures)} failed, {status} -> {out}")
    return 0 if report.passed else 1

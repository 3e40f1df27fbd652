"""
MESQ - state command
"""

import argparse
import logging
from pathlib import Path

from mesq.config import config, parse_float_list
from mesq.core.base import ArgumentError, LabelVariant, UsageError
from mesq.services.export_service import fock_dump, gaussian_dump, write_json
from mesq.services.fock_engine import FockSpace
from mesq.services.state_service import StateLabel, ideal_entangled_vector, regularized_entangled_state

logger = logging.getLogger(__name__)


def run_state(args: argparse.Namespace) -> int:
    if (args.format or "json") != "json":
        raise UsageError(f"unsupported format {args.format!r}; only json is available")
    try:
        variant = LabelVariant(args.variant or LabelVariant.P_CHI.value)
    except ValueError as e:
        raise UsageError(f"unknown variant {args.variant!r}") from e

    n = args.n if args.n is not None else 2
    values = parse_float_list(args.label) if args.label else [0.0] * n
    if len(values) != n:
        raise UsageError(f"label needs {n} values, got {len(values)}")
    try:
        label = StateLabel.from_values(variant, values)
    except ArgumentError as e:
        raise UsageError(f"invalid label: {e}") from e

    if args.r is not None:
        dump = gaussian_dump(regularized_entangled_state(n, label, args.r))
    else:
        if args.cutoff is None:
            raise UsageError("the ideal state needs --cutoff (or pass --r for the regularized state)")
        config.check_fock_envelope(n, args.cutoff)
        dump = fock_dump(ideal_entangled_vector(FockSpace(n, args.cutoff), label), label)

    out = Path(args.json) if args.json else config.REPORT_DIR / f"state_{variant.value}.json"
    write_json(dump, out)
    print(f"{dump.kind.value} state, n={n}, label={label.values()} -> {out}")
    return 0

"""
MESQ - Export Service

Writes reports, sweep tables and state dumps, and reads state dumps back.

JSON and CSV numbers carry 17 significant digits, so reading a file back
reproduces every value bit for bit.
"""

import csv
import json
import logging
import math
import re
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from mesq.core.base import UsageError
from mesq.models.report_models import FockCoefficient, StateDump, StateKind, SweepTable
from mesq.services.fock_engine import FockSpace, FockVector
from mesq.services.gaussian_engine import GaussianState
from mesq.services.state_service import RegularizedState, StateLabel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# finite floats travel through json.dumps as tagged strings, then lose their quotes
_FLOAT_TAG = "\u0000g17:"
_TAGGED_FLOAT = re.compile(r'"\\u0000g17:([^"]*)"')


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _g17(value: Optional[float]) -> str:
    """17 significant digits; integral values keep a trailing '.0'."""
    if value is None:
        return "nan"
    text = f"{value:.17g}"
    if math.isfinite(value) and not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _tag_floats(obj):
    if isinstance(obj, float) and math.isfinite(obj):
        return _FLOAT_TAG + _g17(obj)
    if isinstance(obj, dict):
        return {key: _tag_floats(value) for key, value in obj.items()}
    if isinstance(obj, list):
        return [_tag_floats(value) for value in obj]
    return obj


def to_json(model: BaseModel) -> str:
    data = _tag_floats(model.model_dump(mode="json", by_alias=True))
    return _TAGGED_FLOAT.sub(r"\1", json.dumps(data, indent=2)) + "\n"


def write_json(model: BaseModel, path: PathLike) -> Path:
    path = _prepare(path)
    path.write_text(to_json(model), encoding="utf-8")
    logger.info(f"wrote {path}")
    return path


def write_csv(table: SweepTable, path: PathLike) -> Path:
    """Header row, one row per grid point, then a '# log_slope' footer line."""
    path = _prepare(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([table.parameter.value] + table.observable_names)
        for row in table.rows:
            writer.writerow([_g17(row.param_value)] + [_g17(row.observables[name]) for name in table.observable_names])
        slopes = " ".join(f"{name}={_g17(table.log_slopes.get(name))}" for name in table.observable_names)
        fh.write(f"# log_slope {slopes}\n")
    logger.info(f"wrote {path} ({len(table.rows)} rows)")
    return path


# ============================================================================
# STATE DUMPS
# ============================================================================

def fock_dump(vector: FockVector, label: StateLabel) -> StateDump:
    space = vector.space
    coefficients = [
        FockCoefficient(index=[int(k) for k in occ], re=float(c.real), im=float(c.imag))
        for occ, c in zip(space.occupations, vector.coeffs)
    ]
    return StateDump(
        kind=StateKind.FOCK,
        n=space.n_modes,
        variant=label.variant.value,
        label=label.values(),
        cutoff=space.cutoff,
        coefficients=coefficients,
    )


def gaussian_dump(state: RegularizedState) -> StateDump:
    return StateDump(
        kind=StateKind.GAUSSIAN,
        n=state.gaussian.n_modes,
        variant=state.label.variant.value,
        label=state.label.values(),
        r=state.r,
        mean=[float(v) for v in state.gaussian.mean],
        cov=[[float(v) for v in row] for row in state.gaussian.cov],
    )


def load_state_dump(path: PathLike) -> Tuple[StateDump, Union[FockVector, GaussianState]]:
    """Read a dump written by the `state` command and rebuild the state it holds."""
    path = Path(path)
    try:
        dump = StateDump.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, ValidationError) as e:
        raise UsageError(f"cannot read state dump {path}: {e}") from e

    if dump.kind is StateKind.GAUSSIAN:
        return dump, GaussianState(np.array(dump.mean), np.array(dump.cov))

    space = FockSpace(dump.n, dump.cutoff)
    coeffs = np.zeros(space.dimension, dtype=complex)
    for entry in dump.coefficients:
        coeffs[space.index_of(entry.index)] = complex(entry.re, entry.im)
    return dump, FockVector(space, coeffs)

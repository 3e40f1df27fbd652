"""
MESQ - Sweep Service

Evaluates named observables on a parameter grid (lambda, r or t) with the
Gaussian engine and fits log-slopes. Grid points are independent and may be
evaluated on a thread pool; rows always come back in grid order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from mesq.config import config
from mesq.core.base import ArgumentError, EprVariant, LabelVariant, UsageError
from mesq.models.report_models import SweepParameter, SweepRow, SweepTable
from mesq.services import dynamics_service as dynamics
from mesq.services import state_service as states
from mesq.services.gaussian_engine import quad_variance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepContext:
    n: int
    beta_chi: float = 1.0


ObservableFn = Callable[[float, SweepContext], float]


# ============================================================================
# OBSERVABLES
# ============================================================================

def _squeezed(lam: float, ctx: SweepContext):
    return dynamics.squeezed_vacuum_stats(ctx.n, lam)


def _epr_variance(variant: EprVariant, direction: Callable[[int], np.ndarray]) -> ObservableFn:
    def observable(r: float, ctx: SweepContext) -> float:
        return quad_variance(dynamics.generate_epr(ctx.n, r, variant), direction(ctx.n))
    return observable


def _regularized_variance(name: str) -> ObservableFn:
    def observable(r: float, ctx: SweepContext) -> float:
        state = states.regularized_entangled_state(ctx.n, states.StateLabel.zero(ctx.n, LabelVariant.P_CHI), r)
        return states.label_variances(state)[name]
    return observable


def _rate_factor(name: str) -> ObservableFn:
    def observable(t: float, ctx: SweepContext) -> float:
        g = dynamics.pfister_hamiltonian(ctx.n, ctx.beta_chi)
        entry = dynamics.heisenberg_rates(g, dynamics.PumpSpec(ctx.beta_chi, t)).entries[name]
        if entry.is_eigen:
            return entry.factor
        c = dict(dynamics.rate_directions(ctx.n))[name]
        return dynamics.scale_along(entry.image, c)[0]
    return observable


OBSERVABLES: Dict[SweepParameter, Dict[str, ObservableFn]] = {
    SweepParameter.LAMBDA: {
        "var_collective_X": lambda lam, ctx: _squeezed(lam, ctx).var_x,
        "var_collective_Y": lambda lam, ctx: _squeezed(lam, ctx).var_y,
        "uncertainty_product": lambda lam, ctx: _squeezed(lam, ctx).uncertainty_product,
    },
    SweepParameter.R: {
        "var_total_P": _epr_variance(EprVariant.P_CHI_ZERO, states.total_momentum_direction),
        "var_relative_Q": _epr_variance(EprVariant.P_CHI_ZERO, lambda n: states.relative_coordinate_direction(n, 2)),
        "var_total_X": _epr_variance(EprVariant.CHI_P_ZERO, states.total_coordinate_direction),
        "var_relative_P": _epr_variance(EprVariant.CHI_P_ZERO, lambda n: states.relative_momentum_direction(n, 2)),
        "var_reg_P": _regularized_variance("P"),
        "var_reg_Q": _regularized_variance("Q2"),
    },
    SweepParameter.T: {
        "scale_sumP": _rate_factor("sumP"),
        "scale_rel_X": _rate_factor("X1-X2"),
    },
}


def fit_log_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log y against x; None unless every y is positive."""
    ys = np.asarray(ys, dtype=float)
    if len(ys) < 2 or np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        return None
    return float(np.polyfit(np.asarray(xs, dtype=float), np.log(ys), 1)[0])


# ============================================================================
# SERVICE
# ============================================================================

class SweepService:
    """Parameter sweeps over the Gaussian engine."""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = config.MAX_WORKERS if max_workers is None else int(max_workers)

    @staticmethod
    def available(parameter) -> List[str]:
        return list(OBSERVABLES[SweepParameter(parameter)])

    def _resolve(self, parameter: SweepParameter, names: Sequence[str]) -> List[str]:
        known = OBSERVABLES[parameter]
        names = list(names) or list(known)
        unknown = [name for name in names if name not in known]
        if unknown:
            raise UsageError(
                f"unknown observable(s) {', '.join(unknown)} for parameter {parameter.value}; "
                f"choose from {', '.join(known)}"
            )
        return names

    def sweep(
        self,
        parameter,
        start: float,
        stop: float,
        steps: int,
        observables: Sequence[str] = (),
        n: int = 2,
        beta_chi: float = 1.0,
    ) -> SweepTable:
        try:
            parameter = SweepParameter(parameter)
        except ValueError as e:
            raise UsageError(f"unknown sweep parameter {parameter!r}") from e
        if not start < stop:
            raise ArgumentError(f"sweep needs from < to, got {start} >= {stop}")
        if steps < 2:
            raise ArgumentError(f"sweep needs at least 2 steps, got {steps}")
        if parameter is SweepParameter.T and start < 0:
            raise ArgumentError("time sweeps start at t >= 0")
        config.check_gaussian_envelope(n)
        names = self._resolve(parameter, observables)
        ctx = SweepContext(n=n, beta_chi=beta_chi)
        grid = np.linspace(start, stop, steps)
        logger.info(f"sweep {parameter.value}: {steps} points x {len(names)} observables, workers={self.max_workers}")

        def evaluate(value: float) -> SweepRow:
            return SweepRow(
                param_value=float(value),
                observables={name: float(OBSERVABLES[parameter][name](float(value), ctx)) for name in names},
            )

        if self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                rows = list(pool.map(evaluate, grid))
        else:
            rows = [evaluate(value) for value in grid]

        slopes = {name: fit_log_slope(grid, [row.observables[name] for row in rows]) for name in names}
        return SweepTable(parameter=parameter, observable_names=names, rows=rows, log_slopes=slopes)


# Global instance
_sweep_service: Optional[SweepService] = None


def get_sweep_service() -> SweepService:
    """Get or create the sweep service instance."""
    global _sweep_service
    if _sweep_service is None:
        _sweep_service = SweepService()
    return _sweep_service

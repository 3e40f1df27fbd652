"""
MESQ - Dynamics Service

Generation and evolution of the multimode entangled states:

- beam splitters and the n-party splitter network
- EPR-type states from squeezed vacua fed through the network
- the commuting squeeze family S_n(lambda_1..lambda_n) and its conjugation laws
- collective quadratures and squeezed-vacuum statistics
- interaction Hamiltonians (one-side squeezers, pairwise down-conversion)
  and their Heisenberg squeezing rates
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from mesq.config import config
from mesq.core.base import (
    ArgumentError,
    EigenKind,
    EprVariant,
    NumericError,
    RangeError,
    Realization,
    StructureKind,
    frozen_array,
    require_finite,
)
from mesq.services.algebra_service import structure_matrix, su11_generators
from mesq.services.fock_engine import (
    FockOperator,
    FockSpace,
    apply,
    commutator,
    exp_raising_on_vacuum,
    inner,
    linear_combination,
    low_subspace_project,
    op_exp,
    op_norm,
    passive_operator,
    quadratic_operator,
    vacuum_vector,
)
from mesq.services.gaussian_engine import (
    GaussianState,
    QuadraticGenerator,
    SymplecticMap,
    apply_map,
    compose,
    fock_realization,
    ladder_to_quadrature,
    omega,
    poisson_bracket_matrix,
    quad_variance,
    symplectic_of_generator,
    vacuum,
)
from mesq.services.state_service import (
    product_state,
    regularized_factor_state,
    relative_coordinate_direction,
    relative_momentum_direction,
    total_coordinate_direction,
    total_momentum_direction,
)

logger = logging.getLogger(__name__)

EIGEN_TOL = 1e-10


# ============================================================================
# PARAMETER TYPES
# ============================================================================

@dataclass(frozen=True, eq=False)
class SqueezeParams:
    """lambda_1 (collective) followed by lambda_2..lambda_n (relative)."""
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        require_finite(lam, "squeeze parameters")
        if lam.size < 2:
            raise ArgumentError("squeeze parameters need n >= 2 entries")
        object.__setattr__(self, "lambdas", frozen_array(lam))

    @property
    def n_modes(self) -> int:
        return self.lambdas.size

    @classmethod
    def uniform(cls, n: int, lam: float) -> "SqueezeParams":
        return cls(np.full(n, float(lam)))

    @classmethod
    def collective_only(cls, n: int, lam: float) -> "SqueezeParams":
        lams = np.zeros(n)
        lams[0] = lam
        return cls(lams)

    @classmethod
    def relative_only(cls, n: int, lam: float) -> "SqueezeParams":
        lams = np.full(n, float(lam))
        lams[0] = 0.0
        return cls(lams)

    def negated(self) -> "SqueezeParams":
        return SqueezeParams(-self.lambdas)


@dataclass(frozen=True)
class BeamSplitterSpec:
    i: int
    j: int
    theta: float

    def __post_init__(self):
        if self.i == self.j:
            raise ArgumentError(f"beam splitter needs two distinct modes, got {self.i} twice")
        if not np.isfinite(self.theta) or not 0.0 <= self.theta <= 2.0 * np.pi:
            raise ArgumentError(f"beam splitter angle must lie in [0, 2pi], got {self.theta}")


@dataclass(frozen=True)
class PumpSpec:
    beta_chi: float
    t: float = 1.0

    def __post_init__(self):
        require_finite(np.array([self.beta_chi, self.t]), "pump parameters")
        if self.t < 0:
            raise ArgumentError(f"time must be >= 0, got {self.t}")


# ============================================================================
# BEAM SPLITTERS AND NETWORK
# ============================================================================

def _mode_rotation(spec: BeamSplitterSpec, n: int) -> np.ndarray:
    """n x n real matrix of a_i -> a_i cos + a_j sin, a_j -> a_i sin - a_j cos."""
    for m in (spec.i, spec.j):
        if int(m) != m or not 1 <= m <= n:
            raise ArgumentError(f"mode {m} out of range 1..{n}")
    c, s = np.cos(spec.theta), np.sin(spec.theta)
    rot = np.eye(n)
    i, j = spec.i - 1, spec.j - 1
    rot[i, i], rot[i, j] = c, s
    rot[j, i], rot[j, j] = s, -c
    return rot


def beam_splitter_map(spec: BeamSplitterSpec, n: int) -> SymplecticMap:
    rot = _mode_rotation(spec, n)
    zero = np.zeros((n, n))
    return SymplecticMap(np.block([[rot, zero], [zero, rot]]), np.zeros(2 * n))


def beam_splitter_fock(space: FockSpace, spec: BeamSplitterSpec) -> FockOperator:
    """Number-conserving Fock matrix of the splitter (exact on every block)."""
    return passive_operator(space, _mode_rotation(spec, space.n_modes))


def network_splitters(n: int) -> List[BeamSplitterSpec]:
    """Splitters in the order they act: B_12(acos 1/sqrt n), B_23(acos 1/sqrt(n-1)), ..., B_{n-1,n}(pi/4)."""
    if int(n) != n or n < 2:
        raise ArgumentError(f"the splitter network needs n >= 2, got {n}")
    return [BeamSplitterSpec(k, k + 1, float(np.arccos(1.0 / np.sqrt(n - k + 1)))) for k in range(1, n)]


def vlb_network(n: int) -> SymplecticMap:
    """Heisenberg map of the network; the first listed splitter acts first."""
    return compose(*[beam_splitter_map(spec, n) for spec in network_splitters(n)])


def vlb_network_fock(space: FockSpace) -> FockOperator:
    m = vlb_network(space.n_modes)
    n = space.n_modes
    return passive_operator(space, m.S[:n, :n])


def generate_epr(n: int, r: float, variant=EprVariant.P_CHI_ZERO) -> GaussianState:
    """
    Squeezed vacua through the network.

    P_CHI_ZERO: mode 1 momentum-squeezed, modes 2..n position-squeezed.
    CHI_P_ZERO: mode 1 position-squeezed, modes 2..n momentum-squeezed.
    """
    variant = EprVariant(variant)
    config.check_gaussian_envelope(n)
    if variant is EprVariant.P_CHI_ZERO:
        first, rest = EigenKind.MOMENTUM, EigenKind.COORDINATE
    else:
        first, rest = EigenKind.COORDINATE, EigenKind.MOMENTUM
    factors = [regularized_factor_state(0.0, first, r)]
    factors += [regularized_factor_state(0.0, rest, r) for _ in range(n - 1)]
    return apply_map(product_state(factors), vlb_network(n))


# ============================================================================
# SQUEEZE FAMILY S_n
# ============================================================================

def _unit(n: int, index: int) -> np.ndarray:
    e = np.zeros(2 * n)
    e[index] = 1.0
    return e


def sn_factor_pairs(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(u, v) for the products u.r v.r multiplying lambda_1..lambda_n: P sum X, Q_k (n P_k - P)."""
    total_p = total_momentum_direction(n)
    pairs = [(total_p, total_coordinate_direction(n))]
    for k in range(2, n + 1):
        pairs.append((relative_coordinate_direction(n, k), n * _unit(n, n + k - 1) - total_p))
    return pairs


def sn_generator_pieces(n: int) -> List[np.ndarray]:
    """Symmetric forms u v^T + v u^T of the mutually commuting pieces."""
    return [np.outer(u, v) + np.outer(v, u) for u, v in sn_factor_pairs(n)]


def sn_generator(params: SqueezeParams) -> QuadraticGenerator:
    """
    H with S_n = exp(-iH).

    u.r v.r = 1/2 r^T (u v^T + v u^T) r + (i/2) u^T Omega v and every
    u^T Omega v equals -n, so the c-number -1/2 sum lambda cancels and
    H = -(1/n) sum lambda_k 1/2 r^T (u v^T + v u^T) r.
    """
    n = params.n_modes
    A = np.zeros((2 * n, 2 * n))
    for lam, piece in zip(params.lambdas, sn_generator_pieces(n)):
        A -= lam * piece / n
    return QuadraticGenerator(A, label="S_n")


def squeeze_Sn(params: SqueezeParams) -> SymplecticMap:
    config.check_gaussian_envelope(params.n_modes)
    return symplectic_of_generator(sn_generator(params), 1.0)


def sn_exponent_fock(space: FockSpace, params: SqueezeParams) -> FockOperator:
    """(i/n)[lambda_1 P sum X + sum lambda_k Q_k (n P_k - P)] - 1/2 sum lambda, products as written."""
    n = space.n_modes
    if params.n_modes != n:
        raise ArgumentError(f"space has {n} modes, parameters have {params.n_modes}")
    total = np.zeros((space.dimension, space.dimension), dtype=complex)
    for lam, (u, v) in zip(params.lambdas, sn_factor_pairs(n)):
        if lam == 0:
            continue
        total += lam * (linear_combination(space, u).matrix @ linear_combination(space, v).matrix)
    exponent = (1j / n) * total - 0.5 * params.lambdas.sum() * np.eye(space.dimension)
    return FockOperator(space, exponent)


def exponent_hermitian_residual(exponent: FockOperator) -> float:
    """Projected norm of E + E+ at total photon number <= d - 3."""
    level = max(exponent.space.cutoff - 3, 0)
    return op_norm(low_subspace_project(exponent + exponent.dagger(), level))


def squeeze_Sn_fock(space: FockSpace, params: SqueezeParams, exact: bool = False) -> FockOperator:
    """
    Fock matrix of S_n.

    exact=False: op_exp of the anti-Hermitian part of the literal truncated
    exponent, after the exponent's Hermitian part is checked to vanish below
    the truncation edge. exact=True: the low-block exact Gaussian realization.
    """
    config.check_fock_envelope(space.n_modes, space.cutoff)
    lam_max = float(np.max(np.abs(params.lambdas)))
    if lam_max > config.SN_FOCK_LAMBDA_MAX:
        raise RangeError(f"|lambda| must be <= {config.SN_FOCK_LAMBDA_MAX} for Fock S_n, got {lam_max}")
    if exact:
        return fock_realization(space, squeeze_Sn(params))
    exponent = sn_exponent_fock(space, params)
    residual = exponent_hermitian_residual(exponent)
    if residual > 1e-12 * max(1.0, op_norm(exponent)):
        raise NumericError(f"S_n exponent is not anti-Hermitian (residual {residual:.3e})")
    return op_exp(0.5 * (exponent - exponent.dagger()))


def commutativity_residuals(n: int, space: Optional[FockSpace] = None) -> Dict[str, float]:
    """Pairwise Poisson brackets of the S_n pieces and, with a space, projected Fock commutators."""
    pieces = sn_generator_pieces(n)
    out: Dict[str, float] = {}
    fock_pieces = [quadratic_operator(space, p) for p in pieces] if space is not None else None
    level = space.cutoff - 5 if space is not None else 0
    for a in range(len(pieces)):
        for b in range(a + 1, len(pieces)):
            out[f"poisson_{a + 1}_{b + 1}"] = float(np.max(np.abs(poisson_bracket_matrix(pieces[a], pieces[b]))))
            if fock_pieces is not None:
                comm = commutator(fock_pieces[a], fock_pieces[b])
                out[f"fock_{a + 1}_{b + 1}"] = op_norm(low_subspace_project(comm, level))
    return out


# ============================================================================
# OBSERVABLES
# ============================================================================

def conjugate_observable(m: SymplecticMap, c: Sequence[float], picture: str = "heisenberg") -> np.ndarray:
    """
    Coefficient vector of U+ (c.r) U (heisenberg, S^T c) or of U (c.r) U+
    (adjoint, S^-T c). The scalar part is observable_shift.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (2 * m.n_modes,):
        raise ArgumentError(f"direction must have length {2 * m.n_modes}, got {c.shape}")
    if picture == "heisenberg":
        return m.S.T @ c
    if picture == "adjoint":
        return m.inverse().S.T @ c
    raise ArgumentError(f"unknown picture {picture!r}")


def observable_shift(m: SymplecticMap, c: Sequence[float], picture: str = "heisenberg") -> float:
    target = m if picture == "heisenberg" else m.inverse()
    return float(np.asarray(c, dtype=float) @ target.d)


def collective_x_direction(n: int) -> np.ndarray:
    return total_coordinate_direction(n) / np.sqrt(2.0 * n)


def collective_y_direction(n: int) -> np.ndarray:
    return total_momentum_direction(n) / np.sqrt(2.0 * n)


def scale_along(image: np.ndarray, c: np.ndarray) -> Tuple[float, float]:
    """(factor, residual) of image ~ factor * c."""
    factor = float(c @ image / (c @ c))
    return factor, float(np.linalg.norm(image - factor * c))


@dataclass
class SqueezedVacuumStats:
    n: int
    lam: float
    var_x: float
    var_y: float
    var_total_x: float
    var_relative_p: float
    closed_form_norm: Optional[float] = None
    closed_form_overlap: Optional[float] = None

    @property
    def uncertainty_product(self) -> float:
        return self.var_x * self.var_y


def squeezed_vacuum_state(n: int, lam: float) -> GaussianState:
    return apply_map(vacuum(n), squeeze_Sn(SqueezeParams.uniform(n, lam)))


def closed_form_squeezed_vacuum(space: FockSpace, lam: float):
    """sech^{n/2}(lam) exp(K+ tanh lam)|vac> with the G realization."""
    triple = su11_generators(space, Realization.G)
    v = exp_raising_on_vacuum(np.tanh(lam) * triple.k_plus)
    return v.scaled(np.cosh(lam) ** (-space.n_modes / 2.0))


def squeezed_vacuum_stats(n: int, lam: float, cutoff: Optional[int] = None) -> SqueezedVacuumStats:
    """
    Collective-quadrature statistics of S'_n|vac>. With a cutoff the closed
    form is also built in the Fock engine: its norm and its overlap with the
    exact realization of S'_n applied to the vacuum are reported.
    """
    state = squeezed_vacuum_state(n, lam)
    stats = SqueezedVacuumStats(
        n=n,
        lam=float(lam),
        var_x=quad_variance(state, collective_x_direction(n)),
        var_y=quad_variance(state, collective_y_direction(n)),
        var_total_x=quad_variance(state, total_coordinate_direction(n)),
        var_relative_p=max(quad_variance(state, relative_momentum_direction(n, k)) for k in range(2, n + 1)),
    )
    if cutoff is not None:
        config.check_fock_envelope(n, cutoff)
        space = FockSpace(n, cutoff)
        closed = closed_form_squeezed_vacuum(space, lam)
        stats.closed_form_norm = closed.norm()
        realized = apply(fock_realization(space, squeeze_Sn(SqueezeParams.uniform(n, lam))), vacuum_vector(space))
        stats.closed_form_overlap = abs(inner(realized, closed)) / (realized.norm() * closed.norm())
    return stats


# ============================================================================
# HAMILTONIANS
# ============================================================================

def hamiltonian_HI(n: int, rate1: float, rate2: float) -> QuadraticGenerator:
    """-(i/2) rate1 a+ G' a+~ + (i/2) rate2 a+ G'' a+~ + h.c."""
    require_finite(np.array([rate1, rate2]), "rates")
    gp = structure_matrix(StructureKind.GP, n).entries
    gpp = structure_matrix(StructureKind.GPP, n).entries
    return ladder_to_quadrature(n, pair=-1j * rate1 * gp + 1j * rate2 * gpp, label="H_I")


def pfister_hamiltonian(n: int, beta_chi: float) -> QuadraticGenerator:
    """i beta_chi sum_{i<j} a_i+ a_j+ + h.c."""
    if int(n) != n or n < 2:
        raise ArgumentError(f"pairwise down-conversion needs n >= 2, got {n}")
    require_finite(np.array([beta_chi]), "beta_chi")
    pair = 1j * beta_chi * (np.ones((n, n)) - np.eye(n))
    return ladder_to_quadrature(n, pair=pair, label="pfister")


@dataclass
class RateEntry:
    name: str
    rate: float
    is_eigen: bool
    factor: Optional[float]
    image: np.ndarray = field(repr=False, default=None)
    # rate in units of the pump beta_chi; None for non-eigen directions or beta_chi = 0
    rate_per_beta_chi: Optional[float] = None


@dataclass
class RateReport:
    t: float
    beta_chi: float
    entries: Dict[str, RateEntry]

    def factor(self, name: str) -> Optional[float]:
        return self.entries[name].factor


def rate_directions(n: int) -> List[Tuple[str, np.ndarray]]:
    dirs = [("sumP", total_momentum_direction(n))]
    dirs += [(f"X1-X{j}", relative_coordinate_direction(n, j)) for j in range(2, n + 1)]
    return dirs


def heisenberg_rates(
    g: QuadraticGenerator, pump: PumpSpec, directions: Optional[List[Tuple[str, np.ndarray]]] = None
) -> RateReport:
    """
    Scaling of each direction under S(t) = exp(t Omega A).

    A direction c is an eigendirection when (Omega A)^T c = kappa c; its factor
    is then exp(kappa t) exactly and kappa / beta_chi is its rate in pump units.
    Other directions report their image only.
    """
    n = g.n_modes
    flow_t = (omega(n) @ g.A).T
    image_map = symplectic_of_generator(g, pump.t)
    entries: Dict[str, RateEntry] = {}
    for name, c in directions or rate_directions(n):
        c = np.asarray(c, dtype=float)
        moved = flow_t @ c
        kappa = float(c @ moved / (c @ c))
        is_eigen = np.linalg.norm(moved - kappa * c) <= EIGEN_TOL * max(1.0, np.linalg.norm(moved))
        image = conjugate_observable(image_map, c)
        factor = float(np.exp(kappa * pump.t)) if is_eigen else None
        if not is_eigen:
            logger.debug(f"direction {name} is not an eigendirection of the flow")
        per_pump = kappa / pump.beta_chi if is_eigen and pump.beta_chi != 0 else None
        entries[name] = RateEntry(name, kappa if is_eigen else float("nan"), bool(is_eigen), factor, image, per_pump)
    return RateReport(float(pump.t), float(pump.beta_chi), entries)


def cross_engine_generators(n: int, count: int, seed: int, scale: float = 0.3) -> List[QuadraticGenerator]:
    """Seeded random generators with ||A||_2 = scale and ||b|| = scale."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        raw = rng.standard_normal((2 * n, 2 * n))
        A = raw + raw.T
        A *= scale / np.linalg.norm(A, 2)
        b = rng.standard_normal(2 * n)
        b *= scale / np.linalg.norm(b)
        out.append(QuadraticGenerator(A, b, label=f"random-{k}"))
    return out

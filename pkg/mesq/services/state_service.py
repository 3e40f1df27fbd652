"""
MESQ - State Service

Constructors for the entangled states |p,chi> (eigenstate of total momentum
and the relative coordinates X_1 - X_i) and |chi,p> (eigenstate of total
coordinate and the relative momenta P_1 - P_i):

    ideal form        exp[-1/4 |y|^2 + y.a+ + 1/2 a+ M a+~] |vac>, unnormalized
    regularized form  Gaussian state obtained by disentangling squeezed factor
                      states at finite squeezing r

Everything Gaussian-ket shaped goes through GaussianKet: a vector
exp(c + l.a+ + 1/2 a+ M a+~)|vac> with exact Fock amplitudes, exact transport
through Gaussian unitaries and closed-form overlaps.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from mesq.config import config
from mesq.core.base import (
    ArgumentError,
    EigenKind,
    LabelVariant,
    NumericError,
    RangeError,
    frozen_array,
    require_finite,
)
from mesq.services.fock_engine import (
    FockOperator,
    FockSpace,
    FockVector,
    apply,
    exp_raising_on_vacuum,
    inner,
    linear_combination,
    low_subspace_project,
    make_ladder,
    op_exp,
)
from mesq.services.gaussian_engine import (
    GaussianState,
    QuadraticGenerator,
    SymplecticMap,
    apply_map,
    overlap,
    quad_mean,
    quad_variance,
    state_generator,
    symplectic_of_generator,
)

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
DEGENERATE_NORM = 1e-12
COMPLETENESS_MAX_CUTOFF = 12


# ============================================================================
# LABELS
# ============================================================================

@dataclass(frozen=True, eq=False)
class StateLabel:
    """(p, chi_2..chi_n) for P_CHI or (chi, p_2..p_n) for CHI_P."""
    variant: LabelVariant
    scalar: float
    rest: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        object.__setattr__(self, "variant", LabelVariant(self.variant))
        rest = np.atleast_1d(np.asarray(self.rest, dtype=float))
        require_finite(np.append(rest, self.scalar), "label")
        object.__setattr__(self, "scalar", float(self.scalar))
        object.__setattr__(self, "rest", frozen_array(rest))

    @property
    def n_modes(self) -> int:
        return self.rest.size + 1

    @classmethod
    def p_chi(cls, p: float, chis: Sequence[float]) -> "StateLabel":
        return cls(LabelVariant.P_CHI, p, chis)

    @classmethod
    def chi_p(cls, chi: float, ps: Sequence[float]) -> "StateLabel":
        return cls(LabelVariant.CHI_P, chi, ps)

    @classmethod
    def zero(cls, n: int, variant: LabelVariant = LabelVariant.P_CHI) -> "StateLabel":
        return cls(variant, 0.0, np.zeros(n - 1))

    @classmethod
    def from_values(cls, variant: LabelVariant, values: Sequence[float]) -> "StateLabel":
        if len(values) < 2:
            raise ArgumentError("a label needs at least two values (n >= 2)")
        return cls(variant, values[0], values[1:])

    def values(self) -> List[float]:
        return [self.scalar] + [float(v) for v in self.rest]


def random_labels(n: int, count: int, seed: int, variant: LabelVariant, spread: float = 1.0):
    """Seeded labels with entries uniform in [-spread, spread]."""
    rng = np.random.default_rng(seed)
    draws = rng.uniform(-spread, spread, size=(count, n))
    return [StateLabel(variant, row[0], row[1:]) for row in draws]


@dataclass(frozen=True, eq=False)
class DisplacementY:
    y: np.ndarray


def _check_label(label: StateLabel, n: int) -> None:
    if int(n) != n or n < 2:
        raise ArgumentError(f"entangled states need n >= 2, got {n}")
    if label.n_modes != n:
        raise ArgumentError(f"label has {label.n_modes} entries, expected {n}")


def displacement_y(label: StateLabel, n: int) -> DisplacementY:
    """
    P_CHI: y_1 = sqrt2/n (i p + sum chi_k),  y_i = y_1 - sqrt2 chi_i
    CHI_P: y_1 = sqrt2/n (chi + i sum p_k), y_i = y_1 - i sqrt2 p_i
    """
    _check_label(label, n)
    y = np.empty(n, dtype=complex)
    if label.variant is LabelVariant.P_CHI:
        y[0] = SQRT2 / n * (1j * label.scalar + label.rest.sum())
        y[1:] = y[0] - SQRT2 * label.rest
    else:
        y[0] = SQRT2 / n * (label.scalar + 1j * label.rest.sum())
        y[1:] = y[0] - 1j * SQRT2 * label.rest
    return DisplacementY(frozen_array(y))


def pair_matrix(variant: LabelVariant, n: int) -> np.ndarray:
    """Quadratic form of the ideal states: 2J/n - I for P_CHI, its negative for CHI_P."""
    m = 2.0 * np.ones((n, n)) / n - np.eye(n)
    return m if LabelVariant(variant) is LabelVariant.P_CHI else -m


def ideal_prefactor(n: int) -> float:
    """Normalization metadata 1/(sqrt(n) pi^(n/4)); never used by residual checks."""
    return 1.0 / (np.sqrt(n) * np.pi ** (n / 4.0))


# ============================================================================
# OBSERVABLE DIRECTIONS  (coefficient vectors over (X_1..X_n, P_1..P_n))
# ============================================================================

def total_momentum_direction(n: int) -> np.ndarray:
    return np.concatenate([np.zeros(n), np.ones(n)])


def total_coordinate_direction(n: int) -> np.ndarray:
    return np.concatenate([np.ones(n), np.zeros(n)])


def relative_coordinate_direction(n: int, i: int) -> np.ndarray:
    """Q_i = X_1 - X_i for 2 <= i <= n."""
    if not 2 <= i <= n:
        raise ArgumentError(f"relative index must be in 2..{n}, got {i}")
    c = np.zeros(2 * n)
    c[0] += 1.0
    c[i - 1] -= 1.0
    return c


def relative_momentum_direction(n: int, i: int) -> np.ndarray:
    """P_1 - P_i for 2 <= i <= n."""
    if not 2 <= i <= n:
        raise ArgumentError(f"relative index must be in 2..{n}, got {i}")
    c = np.zeros(2 * n)
    c[n] += 1.0
    c[n + i - 1] -= 1.0
    return c


def eigen_observables(label: StateLabel) -> List[Tuple[str, np.ndarray, float]]:
    """(name, direction, eigenvalue) for every defining observable of the label."""
    n = label.n_modes
    if label.variant is LabelVariant.P_CHI:
        out = [("P", total_momentum_direction(n), label.scalar)]
        out += [(f"Q{i}", relative_coordinate_direction(n, i), label.rest[i - 2]) for i in range(2, n + 1)]
    else:
        out = [("sumX", total_coordinate_direction(n), label.scalar)]
        out += [(f"P1-P{i}", relative_momentum_direction(n, i), label.rest[i - 2]) for i in range(2, n + 1)]
    return out


# ============================================================================
# GAUSSIAN KETS
# ============================================================================

def _ladder_frame(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """T with r = T [a; a+] and W with a = W r."""
    eye = np.eye(n)
    t = np.block([[eye, eye], [-1j * eye, 1j * eye]]) / SQRT2
    w = np.hstack([eye, 1j * eye]) / SQRT2
    return t, w


def ket_amplitudes(ell: np.ndarray, pair: np.ndarray, levels: int) -> np.ndarray:
    """
    Amplitudes <k|exp(l.a+ + 1/2 a+ M a+~)|vac> for every k in the box
    levels^n, row-major with mode 1 slowest.

    `ell` may carry leading batch dimensions; the multimode Hermite recursion
    sqrt(k_i) psi_k = l_i psi_{k-e_i} + sum_j M_ij sqrt(k_j - d_ij) psi_{k-e_i-e_j}
    is evaluated for the whole batch at once.
    """
    ell = np.asarray(ell, dtype=complex)
    n = ell.shape[-1]
    pair = np.asarray(pair, dtype=complex)
    shape = (levels,) * n
    out = np.zeros(ell.shape[:-1] + (levels ** n,), dtype=complex)
    out[..., 0] = 1.0
    for k in itertools.product(range(levels), repeat=n):
        if not any(k):
            continue
        i = next(m for m in range(n) if k[m] > 0)
        km = list(k)
        km[i] -= 1
        value = ell[..., i] * out[..., np.ravel_multi_index(tuple(km), shape)]
        for j in range(n):
            if km[j] > 0 and pair[i, j] != 0:
                kmm = list(km)
                kmm[j] -= 1
                value = value + pair[i, j] * np.sqrt(km[j]) * out[..., np.ravel_multi_index(tuple(kmm), shape)]
        out[..., np.ravel_multi_index(k, shape)] = value / np.sqrt(k[i])
    return out


@dataclass(frozen=True, eq=False)
class GaussianKet:
    """exp(log_scale + ell.a+ + 1/2 a+ pair a+~)|vac>."""
    ell: np.ndarray
    pair: np.ndarray
    log_scale: complex = 0.0

    def __post_init__(self):
        ell = np.atleast_1d(np.asarray(self.ell, dtype=complex))
        pair = np.asarray(self.pair, dtype=complex)
        n = ell.size
        if pair.shape != (n, n):
            raise ArgumentError(f"pair matrix must be {n}x{n}, got {pair.shape}")
        require_finite(ell, "ket linear term")
        require_finite(pair, "ket pair matrix")
        object.__setattr__(self, "ell", frozen_array(ell))
        object.__setattr__(self, "pair", frozen_array(0.5 * (pair + pair.T)))
        object.__setattr__(self, "log_scale", complex(self.log_scale))

    @property
    def n_modes(self) -> int:
        return self.ell.size

    @classmethod
    def vacuum(cls, n: int) -> "GaussianKet":
        return cls(np.zeros(n), np.zeros((n, n)), 0.0)

    @classmethod
    def from_state(cls, state: GaussianState) -> "GaussianKet":
        """Normalized ket of a pure Gaussian state; vacuum amplitude real positive."""
        shape = cls.vacuum(state.n_modes).transformed(state_generator(state))
        return shape.normalized()

    def with_scale(self, log_scale: complex) -> "GaussianKet":
        return GaussianKet(self.ell, self.pair, log_scale)

    def normalized(self) -> "GaussianKet":
        bare = self.with_scale(0.0)
        norm_sq = ket_overlap(bare, bare).real
        if not np.isfinite(norm_sq) or norm_sq <= 0:
            raise NumericError("ket is not normalizable")
        return self.with_scale(-0.5 * np.log(norm_sq))

    def amplitudes(self, levels: int) -> np.ndarray:
        return np.exp(self.log_scale) * ket_amplitudes(self.ell, self.pair, levels)

    def vector(self, space: FockSpace) -> FockVector:
        if space.n_modes != self.n_modes:
            raise ArgumentError(f"space has {space.n_modes} modes, ket has {self.n_modes}")
        return FockVector(space, self.amplitudes(space.cutoff))

    def transformed(self, m: SymplecticMap) -> "GaussianKet":
        """
        Shape (ell, pair) of V|ket> for the unitary V with Heisenberg map `m`.

        The annihilators a - M a+ - l of the ket are conjugated by V; the
        scalar is not determined this way and is reset to zero.
        """
        n = self.n_modes
        if m.n_modes != n:
            raise ArgumentError("map and ket mode counts differ")
        inv = m.inverse()
        t, w = _ladder_frame(n)
        coeff = w @ inv.S @ t
        a_part, b_part = coeff[:, :n], coeff[:, n:]
        delta = w @ inv.d
        M, ell = self.pair, self.ell
        c = a_part - M @ b_part.conj()
        new_pair = -np.linalg.solve(c, b_part - M @ a_part.conj())
        new_ell = -np.linalg.solve(c, delta - M @ delta.conj() - ell)
        return GaussianKet(new_ell, new_pair, 0.0)


def ket_overlap(bra: GaussianKet, ket: GaussianKet, steps: int = 64) -> complex:
    """
    <bra|ket> in closed form (Bargmann Gaussian integral).

    det(I - conj(M1) M2)^(-1/2) takes the branch continued from 1 along
    det(I - s conj(M1) M2), s in [0, 1].
    """
    n = bra.n_modes
    if ket.n_modes != n:
        raise ArgumentError("overlap needs equal mode counts")
    b = bra.pair.conj()
    m = ket.pair
    eye = np.eye(n)
    path = np.array([np.linalg.det(eye - s * b @ m) for s in np.linspace(0.0, 1.0, steps + 1)])
    if np.any(np.abs(path) < 1e-300):
        raise NumericError("Gaussian overlap integral diverges")
    phase = np.unwrap(np.angle(path))[-1]
    sqrt_det = np.sqrt(np.abs(path[-1])) * np.exp(0.5j * phase)

    q = np.block([[-m, eye], [eye, -b]])
    j = np.concatenate([ket.ell, bra.ell.conj()])
    exponent = 0.5 * j @ np.linalg.solve(q, j)
    return complex(np.exp(np.conj(bra.log_scale) + ket.log_scale + exponent) / sqrt_det)


def ideal_ket(label: StateLabel) -> GaussianKet:
    """Ideal entangled state including the normalization metadata."""
    n = label.n_modes
    y = displacement_y(label, n).y
    log_scale = -0.25 * np.sum(np.abs(y) ** 2) + np.log(ideal_prefactor(n))
    return GaussianKet(y, pair_matrix(label.variant, n), log_scale)


def factor_ket(value: float, kind: EigenKind) -> GaussianKet:
    """pi^(-1/4) exp(-v^2/2 + l a+ -/+ a+^2/2)|0> for a coordinate/momentum eigenstate."""
    kind = EigenKind(kind)
    if kind is EigenKind.COORDINATE:
        ell, pair = SQRT2 * value, -1.0
    else:
        ell, pair = 1j * SQRT2 * value, 1.0
    return GaussianKet([ell], [[pair]], -0.25 * np.log(np.pi) - 0.5 * value ** 2)


def product_ket(factors: Sequence[GaussianKet]) -> GaussianKet:
    n = sum(f.n_modes for f in factors)
    ell = np.concatenate([f.ell for f in factors])
    pair = np.zeros((n, n), dtype=complex)
    pos = 0
    for f in factors:
        pair[pos:pos + f.n_modes, pos:pos + f.n_modes] = f.pair
        pos += f.n_modes
    return GaussianKet(ell, pair, sum(f.log_scale for f in factors))


# ============================================================================
# IDEAL FOCK VECTORS
# ============================================================================

def _series_vector(space: FockSpace, ell: np.ndarray, pair: np.ndarray) -> FockVector:
    """exp(l.a+ + 1/2 a+ M a+~)|vac> by the terminating power series."""
    n = space.n_modes
    dim = space.dimension
    raising = np.zeros((dim, dim), dtype=complex)
    creators = [make_ladder(space, k + 1)[1].matrix for k in range(n)]
    for i in range(n):
        if ell[i] != 0:
            raising += ell[i] * creators[i]
        for j in range(n):
            if pair[i, j] != 0:
                raising += 0.5 * pair[i, j] * (creators[i] @ creators[j])
    return exp_raising_on_vacuum(FockOperator(space, raising))


def ideal_entangled_vector(space: FockSpace, label: StateLabel) -> FockVector:
    """Truncated coefficients of exp[-1/4|y|^2 + y.a+ + 1/2 a+ M a+~]|vac> (unnormalized)."""
    n = space.n_modes
    _check_label(label, n)
    y = displacement_y(label, n).y
    v = _series_vector(space, y, pair_matrix(label.variant, n))
    return v.scaled(np.exp(-0.25 * np.sum(np.abs(y) ** 2)))


def factor_eigenstate(space: FockSpace, mode: int, value: float, kind: EigenKind) -> FockVector:
    """Ideal coordinate/momentum eigenstate on `mode`, vacuum on the other modes."""
    idx = space.mode_index(mode)
    base = factor_ket(value, kind)
    n = space.n_modes
    ell = np.zeros(n, dtype=complex)
    pair = np.zeros((n, n), dtype=complex)
    ell[idx] = base.ell[0]
    pair[idx, idx] = base.pair[0, 0]
    return _series_vector(space, ell, pair).scaled(np.exp(base.log_scale))


# ============================================================================
# EIGEN RESIDUALS
# ============================================================================

@dataclass
class EigenResidualReport:
    """Projected residual ratios ||(O - o) v|| / ||v|| per defining observable."""
    ratios: Dict[str, float]
    level: int

    @property
    def max_ratio(self) -> float:
        return max(self.ratios.values())


def _residual_ratio(v: FockVector, op: FockOperator, value: float, level: int) -> float:
    projected_norm = low_subspace_project(v, level).norm()
    if projected_norm < DEGENERATE_NORM:
        raise NumericError("cutoff too small: projected vector is degenerate")
    shifted = apply(op, v) - v.scaled(value)
    return low_subspace_project(shifted, level).norm() / projected_norm


def eigen_residual(v: FockVector, label: StateLabel) -> EigenResidualReport:
    space = v.space
    _check_label(label, space.n_modes)
    level = space.cutoff - 3
    if level < 0:
        raise NumericError("cutoff too small for the eigen residual projection")
    ratios = {
        name: _residual_ratio(v, linear_combination(space, c), value, level)
        for name, c, value in eigen_observables(label)
    }
    return EigenResidualReport(ratios, level)


def single_mode_residual(v: FockVector, mode: int, value: float, kind: EigenKind) -> float:
    """Projected residual ratio of X_mode (or P_mode) against `value`."""
    space = v.space
    idx = space.mode_index(mode)
    c = np.zeros(2 * space.n_modes)
    c[idx if EigenKind(kind) is EigenKind.COORDINATE else space.n_modes + idx] = 1.0
    return _residual_ratio(v, linear_combination(space, c), value, space.cutoff - 3)


# ============================================================================
# ENTANGLING OPERATOR
# ============================================================================

def entangling_generator(n: int) -> QuadraticGenerator:
    """H = -X_1 sum_{k>=2} P_k, so exp(-iH) = exp(i X_1 sum P_k)."""
    if int(n) != n or n < 2:
        raise ArgumentError(f"entangling operator needs n >= 2, got {n}")
    A = np.zeros((2 * n, 2 * n))
    for k in range(1, n):
        A[0, n + k] = A[n + k, 0] = -1.0
    return QuadraticGenerator(A, label="entangling")


def entangling_map(n: int) -> SymplecticMap:
    """Heisenberg action of exp(i X_1 sum P_k): X_k -> X_k - X_1, P_1 -> P_1 + sum P_k."""
    return symplectic_of_generator(entangling_generator(n), 1.0)


def conjugate_entangling_map(n: int) -> SymplecticMap:
    """Disentangler of the CHI_P family: X_1 -> X_1 - sum X_k, P_k -> P_k + P_1."""
    if int(n) != n or n < 2:
        raise ArgumentError(f"entangling operator needs n >= 2, got {n}")
    S = np.eye(2 * n)
    S[0, 1:n] = -1.0
    S[n + 1:, n] = 1.0
    return SymplecticMap(S, np.zeros(2 * n))


def entangling_fock_operator(space: FockSpace) -> FockOperator:
    """exp(i X_1 sum P_k) as a literal truncated exponential (exactly unitary)."""
    n = space.n_modes
    if n < 2:
        raise ArgumentError("entangling operator needs n >= 2")
    x1 = linear_combination(space, np.eye(2 * n)[0])
    p_rest = linear_combination(space, np.concatenate([np.zeros(n), [0.0], np.ones(n - 1)]))
    # symmetrized product so the truncated generator stays Hermitian
    herm = 0.5 * (x1.matrix @ p_rest.matrix + p_rest.matrix @ x1.matrix)
    return op_exp(FockOperator(space, 1j * herm))


def entangling_operator(n: int, space: Optional[FockSpace] = None):
    """(SymplecticMap, FockOperator or None) of exp(i X_1 sum_k P_k)."""
    fock = entangling_fock_operator(space) if space is not None else None
    return entangling_map(n), fock


@dataclass
class FactorizationReport:
    """exp(i X_1 sum P)|p,chi> against e^{-ip sum chi/n} |p>_1 |-chi_2>_2 ... ."""
    normalized_overlap: float
    scalar: complex
    expected_scalar: complex
    shape_residual: float

    @property
    def overlap_defect(self) -> float:
        return 1.0 - self.normalized_overlap

    @property
    def scalar_error(self) -> float:
        return abs(self.scalar - self.expected_scalar)


def entangling_factorization(label: StateLabel, cutoff: int) -> FactorizationReport:
    """
    Both sides are built as exact Gaussian kets; the left side's scalar comes
    from <vac|U|p,chi> = <U+ vac|p,chi>, and <vac|U|vac> is real positive.
    """
    if label.variant is not LabelVariant.P_CHI:
        raise ArgumentError("factorization is defined for the P_CHI family")
    n = label.n_modes
    u_map = entangling_map(n)

    source = ideal_ket(label)
    vac_image = GaussianKet.vacuum(n).transformed(u_map.inverse())
    m0 = vac_image.pair
    vac_image = vac_image.with_scale(0.25 * np.log(np.linalg.det(np.eye(n) - m0.conj() @ m0).real))
    lhs = source.transformed(u_map).with_scale(np.log(ket_overlap(vac_image, source)))

    factors = [factor_ket(label.scalar, EigenKind.MOMENTUM)]
    factors += [factor_ket(-chi, EigenKind.COORDINATE) for chi in label.rest]
    rhs = product_ket(factors)

    shape_residual = max(
        float(np.max(np.abs(lhs.pair - rhs.pair))), float(np.max(np.abs(lhs.ell - rhs.ell)))
    )
    space = FockSpace(n, cutoff)
    lhs_v = lhs.vector(space)
    rhs_v = rhs.vector(space)
    cross = inner(rhs_v, lhs_v)
    norm_overlap = abs(cross) / (lhs_v.norm() * rhs_v.norm())
    scalar = cross / inner(rhs_v, rhs_v)
    expected = np.exp(-1j * label.scalar * label.rest.sum() / n)
    return FactorizationReport(float(norm_overlap), complex(scalar), complex(expected), shape_residual)


def _phase_aligned_distance(u: FockVector, v: FockVector, level: int) -> float:
    """||P u - e^{i phi} P v|| / ||P v|| with the phase phi that minimizes it."""
    pu, pv = low_subspace_project(u, level), low_subspace_project(v, level)
    if pv.norm() < DEGENERATE_NORM:
        raise NumericError("cutoff too small: projected vector is degenerate")
    cross = inner(pv, pu)
    phase = cross / abs(cross) if abs(cross) > 0 else 1.0
    return (pu - pv.scaled(phase)).norm() / pv.norm()


def entangling_fock_transport(label: StateLabel, cutoff: int, r: float = 0.0,
                              level: Optional[int] = None) -> Dict[str, float]:
    """
    The literal truncated exp(i X_1 sum P) against the Gaussian construction.

    forward: U applied to the truncated regularized state gives the factor product.
    backward: U+ applied to the truncated factor product gives the regularized state.
    Both are phase-aligned distances below `level` (default cutoff // 3).
    """
    if label.variant is not LabelVariant.P_CHI:
        raise ArgumentError("the entangling operator transports the P_CHI family")
    n = label.n_modes
    config.check_fock_envelope(n, cutoff)
    level = cutoff // 3 if level is None else level
    space = FockSpace(n, cutoff)

    factors = [regularized_factor_state(label.scalar, EigenKind.MOMENTUM, r)]
    factors += [regularized_factor_state(-c, EigenKind.COORDINATE, r) for c in label.rest]
    product = GaussianKet.from_state(product_state(factors)).vector(space)
    entangled = GaussianKet.from_state(regularized_entangled_state(n, label, r).gaussian).vector(space)

    u = entangling_fock_operator(space)
    forward = _phase_aligned_distance(apply(u, entangled), product, level)
    backward = _phase_aligned_distance(apply(u.dagger(), product), entangled, level)
    logger.debug(f"entangling transport at d={cutoff}: forward {forward:.3e}, backward {backward:.3e}")
    return {"forward": forward, "backward": backward}


# ============================================================================
# REGULARIZED STATES
# ============================================================================

def regularized_factor_state(value: float, kind: EigenKind, r: float) -> GaussianState:
    """Single-mode squeezed state with <X> = value (coordinate) or <P> = value (momentum)."""
    if r < 0 or not np.isfinite(r):
        raise ArgumentError(f"squeezing must be a finite r >= 0, got {r}")
    narrow, wide = 0.5 * np.exp(-2.0 * r), 0.5 * np.exp(2.0 * r)
    if EigenKind(kind) is EigenKind.COORDINATE:
        return GaussianState([value, 0.0], np.diag([narrow, wide]))
    return GaussianState([0.0, value], np.diag([wide, narrow]))


def product_state(factors: Sequence[GaussianState]) -> GaussianState:
    """Tensor product in the (X..., P...) ordering."""
    n = sum(f.n_modes for f in factors)
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    pos = 0
    for f in factors:
        k = f.n_modes
        idx = np.concatenate([np.arange(pos, pos + k), np.arange(n + pos, n + pos + k)])
        mean[idx] = f.mean
        cov[np.ix_(idx, idx)] = f.cov
        pos += k
    return GaussianState(mean, cov)


@dataclass(frozen=True, eq=False)
class RegularizedState:
    gaussian: GaussianState
    r: float
    label: StateLabel


def regularized_entangled_state(n: int, label: StateLabel, r: float) -> RegularizedState:
    """
    P_CHI: exp(-i X_1 sum P_k) applied to |p>_1 |-chi_2>_2 ... |-chi_n>_n at squeezing r.
    CHI_P: the conjugate construction from |chi>_1 |-p_2>_2 ... (momentum factors).
    """
    _check_label(label, n)
    if label.variant is LabelVariant.P_CHI:
        factors = [regularized_factor_state(label.scalar, EigenKind.MOMENTUM, r)]
        factors += [regularized_factor_state(-c, EigenKind.COORDINATE, r) for c in label.rest]
        disentangler = entangling_map(n).inverse()
    else:
        factors = [regularized_factor_state(label.scalar, EigenKind.COORDINATE, r)]
        factors += [regularized_factor_state(-p, EigenKind.MOMENTUM, r) for p in label.rest]
        disentangler = conjugate_entangling_map(n)
    state = apply_map(product_state(factors), disentangler)
    return RegularizedState(state, float(r), label)


def label_means(state: RegularizedState) -> Dict[str, float]:
    """Expectation values of the label's defining observables."""
    return {name: quad_mean(state.gaussian, c) for name, c, _ in eigen_observables(state.label)}


def label_variances(state: RegularizedState) -> Dict[str, float]:
    return {name: quad_variance(state.gaussian, c) for name, c, _ in eigen_observables(state.label)}


def tanh_regularized_ket(label: StateLabel, r: float) -> GaussianKet:
    """Secondary two-mode regularization: the ideal quadratic form with M scaled by tanh r."""
    if label.n_modes != 2:
        raise ArgumentError("the tanh-scaled regularization is defined for n = 2")
    y = displacement_y(label, 2).y
    return GaussianKet(y, np.tanh(r) * pair_matrix(label.variant, 2)).normalized()


def overlap_width(n: int, r: float, index: int = 2, deltas: Sequence[float] = (0.05, 0.1, 0.2, 0.3)) -> float:
    """
    Width sigma of F(delta) = exp(-delta^2 / (2 sigma^2)) between regularized
    P_CHI states whose chi_index differs by delta, fitted over `deltas`.
    """
    if not 2 <= index <= n:
        raise ArgumentError(f"relative index must be in 2..{n}")
    base = regularized_entangled_state(n, StateLabel.zero(n), r).gaussian
    xs, ys = [], []
    for delta in deltas:
        rest = np.zeros(n - 1)
        rest[index - 2] = delta
        other = regularized_entangled_state(n, StateLabel.p_chi(0.0, rest), r).gaussian
        xs.append(delta ** 2)
        ys.append(np.log(overlap(base, other)))
    slope = np.polyfit(xs, ys, 1)[0]
    return float(np.sqrt(-1.0 / (2.0 * slope)))


# ============================================================================
# COMPLETENESS
# ============================================================================

@dataclass
class CompletenessReport:
    r: float
    step: float
    half_width: float
    cutoff: int
    deviation: float
    block: np.ndarray
    cutoff_deviation: float
    cutoff_block: np.ndarray
    rank_one_defect: float
    min_point_eigenvalue: float
    warnings: List[str] = field(default_factory=list)


def ket_linear_response(state: GaussianState) -> Tuple[np.ndarray, np.ndarray]:
    """(pair, L) such that a pure state with this covariance and mean m has ell = L m."""
    root = state_generator(GaussianState(np.zeros_like(state.mean), state.cov))
    n = state.n_modes
    inv = root.inverse()
    t, w = _ladder_frame(n)
    coeff = w @ inv.S @ t
    a_part, b_part = coeff[:, :n], coeff[:, n:]
    pair = -np.linalg.solve(a_part, b_part)
    response = np.linalg.solve(a_part, w @ inv.S)
    return 0.5 * (pair + pair.T), response


def completeness_quadrature_check(
    r: float, cutoff: int = 8, half_width: float = 6.0, step: float = 0.05
) -> CompletenessReport:
    """
    (1/measure) sum_grid h^2 |p,chi><p,chi| over regularized two-mode states,
    accumulated over the cutoff^2 Fock box and compared with the identity,
    both on the whole box and on the block |00>, |01>, |10>, |11>.

    measure = prod_k 2 sqrt(2 pi) sigma_k over the eigen-observable spreads;
    deviation = ||B - I||_F / ||I||_F.
    """
    if cutoff < 2:
        raise ArgumentError("completeness check needs cutoff >= 2")
    if cutoff > COMPLETENESS_MAX_CUTOFF:
        raise RangeError(f"completeness check supports cutoff <= {COMPLETENESS_MAX_CUTOFF}, got {cutoff}")
    if step <= 0 or half_width <= 0:
        raise ArgumentError("grid step and half width must be positive")
    n = 2
    warnings: List[str] = []

    base = regularized_entangled_state(n, StateLabel.zero(n), r)
    spreads = np.sqrt(list(label_variances(base).values()))
    measure = float(np.prod(2.0 * np.sqrt(2.0 * np.pi) * spreads))
    if step > spreads.min():
        message = f"grid step {step} exceeds the regularized peak width {spreads.min():.4g}"
        logger.warning(message)
        warnings.append(message)

    grid = np.linspace(-half_width, half_width, int(round(2 * half_width / step)) + 1)
    h = grid[1] - grid[0]
    pp, cc = np.meshgrid(grid, grid, indexing="ij")
    # label (p, chi) maps to the product mean (P_1 = p, X_2 = -chi) through the disentangler
    product_means = np.zeros((pp.size, 2 * n))
    product_means[:, n] = pp.ravel()
    product_means[:, 1] = -cc.ravel()
    disentangler = entangling_map(n).inverse()
    means = product_means @ disentangler.S.T

    pair, response = ket_linear_response(base.gaussian)
    ells = means @ response.T
    amps = ket_amplitudes(ells, pair, cutoff)

    # per-point normalization: ||exp(l.a+ + 1/2 a+Ma+)|0>||^2 in closed form
    eye = np.eye(n)
    q = np.block([[-pair, eye], [eye, -pair.conj()]])
    q_inv = np.linalg.inv(q)
    js = np.hstack([ells, ells.conj()])
    quad = np.einsum("pi,ij,pj->p", js, q_inv, js).real
    log_norm_sq = 0.5 * quad - 0.5 * np.log(np.linalg.det(eye - pair.conj() @ pair).real)
    amps = amps * np.exp(-0.5 * log_norm_sq)[:, None]

    weight = h * h / measure
    cutoff_block = weight * (amps.T @ amps.conj())
    dim = cutoff ** n
    cutoff_deviation = float(np.linalg.norm(cutoff_block - np.eye(dim)) / np.sqrt(dim))
    # |00>, |01>, |10>, |11> inside the cutoff box
    low = [np.ravel_multi_index(k, (cutoff,) * n) for k in itertools.product(range(2), repeat=n)]
    block = cutoff_block[np.ix_(low, low)]
    deviation = float(np.linalg.norm(block - np.eye(len(low))) / np.sqrt(len(low)))

    # the centre point's contribution, read off the accumulated sum
    centre = amps.shape[0] // 2
    keep = np.ones(amps.shape[0], dtype=bool)
    keep[centre] = False
    point = cutoff_block - weight * (amps[keep].T @ amps[keep].conj())
    eig = np.linalg.eigvalsh(0.5 * (point + point.conj().T))
    top = eig[-1]
    rank_one_defect = float(np.max(np.abs(eig[:-1])) / top) if top > 0 else float("inf")
    min_point_eigenvalue = float(eig[0] / top) if top > 0 else float("-inf")

    logger.info(
        f"completeness r={r} cutoff={cutoff}: deviation {deviation:.4g} "
        f"(cutoff box {cutoff_deviation:.4g}) over {pp.size} grid points"
    )
    return CompletenessReport(
        float(r), float(h), float(half_width), cutoff, deviation, block,
        cutoff_deviation, cutoff_block, rank_one_defect, min_point_eigenvalue, warnings,
    )

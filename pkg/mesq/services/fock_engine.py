"""
MESQ - Fock Engine

Dense truncated Fock-space numerics on n modes with per-mode cutoff d:
ladder operators, quadratures, operator algebra and matrix exponentials.

Basis index encoding is row-major over modes: mode 1 is the slowest-varying
index, so |k_1, ..., k_n> sits at sum_i k_i * d^(n-i). This never changes;
golden files and the Gaussian cross-checks depend on it.

Truncation only pollutes the top levels. Identities involving ladder products
of total degree g are compared after `low_subspace_project(..., d - 1 - g)`.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from mesq.config import config
from mesq.core.base import ArgumentError, NumericError, frozen_array, require_finite

logger = logging.getLogger(__name__)


# ============================================================================
# VALUE TYPES
# ============================================================================

@dataclass(frozen=True)
class FockSpace:
    """n-mode Fock space truncated to levels 0..cutoff-1 per mode."""
    n_modes: int
    cutoff: int

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ArgumentError(f"n_modes must be a positive integer, got {self.n_modes}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ArgumentError(f"cutoff must be an integer >= 2, got {self.cutoff}")

    @property
    def dimension(self) -> int:
        return self.cutoff ** self.n_modes

    @property
    def max_total(self) -> int:
        """Largest total photon number representable in the box."""
        return self.n_modes * (self.cutoff - 1)

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dimension, n_modes) occupation table in basis order."""
        occ = np.array(
            list(itertools.product(range(self.cutoff), repeat=self.n_modes)), dtype=np.int64
        )
        return frozen_array(occ)

    @cached_property
    def totals(self) -> np.ndarray:
        """Total photon number of every basis state."""
        return frozen_array(self.occupations.sum(axis=1))

    def mode_index(self, mode: int) -> int:
        """Validate a 1-based mode number and return the 0-based index."""
        if int(mode) != mode or not 1 <= mode <= self.n_modes:
            raise ArgumentError(f"mode must be in 1..{self.n_modes}, got {mode}")
        return int(mode) - 1

    def index_of(self, occupation: Sequence[int]) -> int:
        """Basis index of |k_1, ..., k_n>."""
        if len(occupation) != self.n_modes:
            raise ArgumentError(f"occupation needs {self.n_modes} entries, got {len(occupation)}")
        if any(k < 0 or k >= self.cutoff for k in occupation):
            raise ArgumentError(f"occupation {tuple(occupation)} outside cutoff {self.cutoff}")
        return int(np.ravel_multi_index(tuple(occupation), (self.cutoff,) * self.n_modes))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Coefficient vector on a FockSpace. May be unnormalized."""
    space: FockSpace
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.space.dimension,):
            raise ArgumentError(
                f"vector length {coeffs.shape} does not match dimension {self.space.dimension}"
            )
        object.__setattr__(self, "coeffs", frozen_array(coeffs))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return complex(self.coeffs[self.space.index_of(occupation)])

    def scaled(self, factor: complex) -> "FockVector":
        return FockVector(self.space, factor * self.coeffs)

    def __add__(self, other: "FockVector") -> "FockVector":
        _check_same_space(self, other)
        return FockVector(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other: "FockVector") -> "FockVector":
        _check_same_space(self, other)
        return FockVector(self.space, self.coeffs - other.coeffs)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense square matrix acting on a FockSpace."""

    __array_ufunc__ = None
    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix)
        if not np.iscomplexobj(matrix):
            matrix = matrix.astype(float)
        dim = self.space.dimension
        if matrix.shape != (dim, dim):
            raise ArgumentError(f"operator shape {matrix.shape} does not match ({dim}, {dim})")
        object.__setattr__(self, "matrix", frozen_array(matrix))

    def dagger(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0.0, atol=atol))

    def __matmul__(self, other):
        if isinstance(other, FockVector):
            return apply(self, other)
        _check_same_space(self, other)
        return FockOperator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        _check_same_space(self, other)
        return FockOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        _check_same_space(self, other)
        return FockOperator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "FockOperator":
        return FockOperator(self.space, scalar * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> "FockOperator":
        return FockOperator(self.space, -self.matrix)


FockObject = Union[FockVector, FockOperator]


def _check_same_space(a: FockObject, b: FockObject) -> None:
    if a.space != b.space:
        raise ArgumentError(f"space mismatch: {a.space} vs {b.space}")


# ============================================================================
# BUILDING BLOCKS
# ============================================================================

def _single_mode_annihilator(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1)


def embed_single_mode(space: FockSpace, mode: int, matrix: np.ndarray) -> np.ndarray:
    """Tensor a d x d single-mode matrix into the n-mode space at `mode`."""
    idx = space.mode_index(mode)
    d = space.cutoff
    left = np.eye(d ** idx)
    right = np.eye(d ** (space.n_modes - idx - 1))
    return np.kron(np.kron(left, matrix), right)


@lru_cache(maxsize=16)
def _ladder_cached(space: FockSpace, mode: int) -> Tuple[FockOperator, FockOperator]:
    a = embed_single_mode(space, mode, _single_mode_annihilator(space.cutoff))
    annihilator = FockOperator(space, a)
    return annihilator, FockOperator(space, a.conj().T)


def make_ladder(space: FockSpace, mode: int) -> Tuple[FockOperator, FockOperator]:
    """Annihilator and creator for `mode` (1-based); creator is the exact adjoint."""
    space.mode_index(mode)
    return _ladder_cached(space, int(mode))


def quadratures(space: FockSpace, mode: int) -> Tuple[FockOperator, FockOperator]:
    """X = (a + a+)/sqrt2 and P = (a - a+)/(i sqrt2)."""
    a, ad = make_ladder(space, mode)
    x = FockOperator(space, (a.matrix + ad.matrix) / np.sqrt(2.0))
    p = FockOperator(space, (a.matrix - ad.matrix) / (1j * np.sqrt(2.0)))
    return x, p


def identity(space: FockSpace) -> FockOperator:
    return FockOperator(space, np.eye(space.dimension))


def zero_operator(space: FockSpace) -> FockOperator:
    return FockOperator(space, np.zeros((space.dimension, space.dimension)))


def vacuum_vector(space: FockSpace) -> FockVector:
    coeffs = np.zeros(space.dimension, dtype=complex)
    coeffs[0] = 1.0
    return FockVector(space, coeffs)


def basis_vector(space: FockSpace, occupation: Sequence[int]) -> FockVector:
    coeffs = np.zeros(space.dimension, dtype=complex)
    coeffs[space.index_of(occupation)] = 1.0
    return FockVector(space, coeffs)


def linear_combination(space: FockSpace, c: Sequence[float]) -> FockOperator:
    """The operator c^T r for r = (X_1..X_n, P_1..P_n)."""
    c = np.asarray(c, dtype=float)
    n = space.n_modes
    if c.shape != (2 * n,):
        raise ArgumentError(f"coefficient vector must have length {2 * n}, got {c.shape}")
    out = np.zeros((space.dimension, space.dimension), dtype=complex)
    for k in range(n):
        x, p = quadratures(space, k + 1)
        if c[k]:
            out += c[k] * x.matrix
        if c[n + k]:
            out += c[n + k] * p.matrix
    return FockOperator(space, out)


def quadratic_operator(space: FockSpace, A: np.ndarray, b: np.ndarray = None) -> FockOperator:
    """H = 1/2 r^T A r + b^T r with products taken literally in the truncated space."""
    n = space.n_modes
    A = np.asarray(A, dtype=float)
    if A.shape != (2 * n, 2 * n):
        raise ArgumentError(f"A must be {2 * n}x{2 * n}, got {A.shape}")
    r = []
    for k in range(n):
        r.append(quadratures(space, k + 1)[0].matrix)
    for k in range(n):
        r.append(quadratures(space, k + 1)[1].matrix)
    out = np.zeros((space.dimension, space.dimension), dtype=complex)
    for i, j in zip(*np.nonzero(A)):
        out += 0.5 * A[i, j] * (r[i] @ r[j])
    if b is not None:
        out += linear_combination(space, b).matrix
    return FockOperator(space, out)


# ============================================================================
# ALGEBRA
# ============================================================================

def commutator(a: FockOperator, b: FockOperator) -> FockOperator:
    _check_same_space(a, b)
    return FockOperator(a.space, a.matrix @ b.matrix - b.matrix @ a.matrix)


def apply(op: FockOperator, v: FockVector) -> FockVector:
    _check_same_space(op, v)
    return FockVector(v.space, op.matrix @ v.coeffs)


def inner(u: FockVector, v: FockVector) -> complex:
    """<u|v>, conjugate-linear in u."""
    _check_same_space(u, v)
    return complex(np.vdot(u.coeffs, v.coeffs))


def low_subspace_project(obj: FockObject, k: int) -> FockObject:
    """Zero every coefficient (or row/column) with total photon number above k."""
    space = obj.space
    if int(k) != k or not 0 <= k <= space.max_total:
        raise ArgumentError(f"projection level must be in 0..{space.max_total}, got {k}")
    keep = space.totals <= k
    if isinstance(obj, FockVector):
        return FockVector(space, np.where(keep, obj.coeffs, 0.0))
    mask = np.outer(keep, keep)
    return FockOperator(space, np.where(mask, obj.matrix, 0.0))


def op_norm(op: FockOperator) -> float:
    """Frobenius norm; an upper bound on the spectral norm."""
    return float(np.linalg.norm(op.matrix))


def conserves_number(op: FockOperator) -> bool:
    """True when `op` only connects states of equal total photon number."""
    totals = op.space.totals
    return not np.any(op.matrix[totals[:, None] != totals[None, :]])


def op_exp(a: FockOperator) -> FockOperator:
    """
    Matrix exponential by scaling and squaring (scipy.linalg.expm).

    Number-conserving generators are exponentiated block by block in total
    photon number, which is exact for every block below the truncation edge.
    """
    require_finite(a.matrix, "op_exp argument")
    space = a.space
    if conserves_number(a):
        totals = space.totals
        out = np.zeros_like(a.matrix, dtype=np.result_type(a.matrix, float))
        for total in np.unique(totals):
            idx = np.flatnonzero(totals == total)
            block = np.ix_(idx, idx)
            out[block] = linalg.expm(a.matrix[block])
        return FockOperator(space, out)
    logger.debug(f"op_exp: dense expm on dimension {space.dimension}")
    return FockOperator(space, linalg.expm(a.matrix))


def exp_raising_on_vacuum(raising: FockOperator) -> FockVector:
    """
    exp(E)|vac> for a strictly number-raising E, by its terminating power series.

    Every term lifts total photon number by at least one, so the series is
    exact at each retained Fock level and vanishes after max_total + 1 terms.
    """
    space = raising.space
    totals = space.totals
    if np.any(raising.matrix[totals[:, None] <= totals[None, :]]):
        raise ArgumentError("exp_raising_on_vacuum needs a strictly number-raising operator")

    term = vacuum_vector(space).coeffs.copy()
    total = term.copy()
    order_limit = space.max_total + 2
    for order in range(1, order_limit + 1):
        term = raising.matrix @ term / order
        if not np.any(term):
            break
        total += term
    else:
        raise NumericError(f"power series did not terminate within {order_limit} terms")
    return FockVector(space, total)


# ============================================================================
# EXACT GAUSSIAN FACTORS
# ============================================================================

def passive_operator(space: FockSpace, w: np.ndarray) -> FockOperator:
    """
    Number-conserving unitary Pi with Pi+ a Pi = W a for a unitary n x n W.

    Pi = exp(sum_ij L_ij a_i+ a_j) with L = log W (complex Schur form), so the
    result is exact on every total-photon block below the truncation edge.
    """
    n = space.n_modes
    w = np.asarray(w, dtype=complex)
    if w.shape != (n, n):
        raise ArgumentError(f"passive matrix must be {n}x{n}, got {w.shape}")
    if not np.allclose(w.conj().T @ w, np.eye(n), atol=1e-10):
        raise ArgumentError("passive matrix must be unitary")

    t, z = linalg.schur(w, output="complex")
    log_w = z @ np.diag(np.log(np.diag(t))) @ z.conj().T

    gen = np.zeros((space.dimension, space.dimension), dtype=complex)
    for i in range(n):
        ad_i = make_ladder(space, i + 1)[1].matrix
        for j in range(n):
            if abs(log_w[i, j]) > 0.0:
                gen += log_w[i, j] * (ad_i @ make_ladder(space, j + 1)[0].matrix)
    return op_exp(FockOperator(space, gen))


def padded_single_mode_unitary(space: FockSpace, generator: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Exponentiate a single-mode generator on a padded cutoff and crop to d."""
    pad = max(config.SINGLE_MODE_PAD, 4 * space.cutoff)
    a = _single_mode_annihilator(pad)
    unitary = linalg.expm(generator(a))
    d = space.cutoff
    return unitary[:d, :d]


def squeezer_operator(space: FockSpace, mode: int, r: float) -> FockOperator:
    """exp(r/2 (a^2 - a+^2)) on `mode`; Heisenberg action X -> e^{-r} X."""
    require_finite(np.asarray(r), "squeezing parameter")
    block = padded_single_mode_unitary(space, lambda a: 0.5 * r * (a @ a - a.T @ a.T))
    return FockOperator(space, embed_single_mode(space, mode, block))


def displacement_operator(space: FockSpace, mode: int, alpha: complex) -> FockOperator:
    """exp(alpha a+ - conj(alpha) a) on `mode`; Heisenberg action a -> a + alpha."""
    require_finite(np.asarray(alpha), "displacement")
    block = padded_single_mode_unitary(space, lambda a: alpha * a.T - np.conj(alpha) * a)
    return FockOperator(space, embed_single_mode(space, mode, block))


def product_of_single_mode(space: FockSpace, factors: Sequence[FockOperator]) -> FockOperator:
    """Ordered product of operators (leftmost first in the returned matrix)."""
    out = identity(space).matrix.astype(complex)
    for f in factors:
        if f.space != space:
            raise ArgumentError(f"space mismatch: {f.space} vs {space}")
        out = out @ f.matrix
    return FockOperator(space, out)

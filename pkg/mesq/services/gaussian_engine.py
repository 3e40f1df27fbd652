"""
MESQ - Gaussian Engine

Exact phase-space representation of Gaussian states and unitaries.

Conventions:
    r = (X_1..X_n, P_1..P_n), Omega = [[0, I], [-I, 0]], [r_j, r_k] = i Omega_jk
    vacuum covariance I/2, covariance entries 1/2 <{dr_j, dr_k}>
    a SymplecticMap (S, d) of a unitary U is its Heisenberg action
    U+ r U = S r + d, so apply_map gives the moments of U|psi>
    a generator H = 1/2 r^T A r + b^T r flows as U = exp(-i t H), S = exp(t Omega A)
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from mesq.core.base import (
    ArgumentError,
    NumericError,
    UnsupportedInputError,
    frozen_array,
    require_finite,
)
from mesq.services.fock_engine import (
    FockOperator,
    FockSpace,
    FockVector,
    displacement_operator,
    passive_operator,
    product_of_single_mode,
    quadratures,
    squeezer_operator,
)

logger = logging.getLogger(__name__)

SYMPLECTIC_TOL = 1e-10
PURITY_TOL = 1e-8


def omega(n: int) -> np.ndarray:
    """Symplectic form for the (X..., P...) ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


# ============================================================================
# VALUE TYPES
# ============================================================================

@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of an n-mode Gaussian state."""
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 or mean.size == 0:
            raise ArgumentError(f"mean must have even positive length, got {mean.shape}")
        m = mean.size
        if cov.shape != (m, m):
            raise ArgumentError(f"covariance shape {cov.shape} does not match mean length {m}")
        require_finite(mean, "mean")
        require_finite(cov, "covariance")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
            raise ArgumentError("covariance is not symmetric")
        # Heisenberg uncertainty: cov + (i/2) Omega >= 0
        eig = np.linalg.eigvalsh(cov + 0.5j * omega(m // 2))
        if eig.min() < -1e-10 * scale:
            raise ArgumentError(f"covariance violates the uncertainty relation (min eig {eig.min():.3e})")
        object.__setattr__(self, "mean", frozen_array(mean))
        object.__setattr__(self, "cov", frozen_array(0.5 * (cov + cov.T)))

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def purity_determinant(self) -> float:
        """det(2 cov); equals 1 exactly for pure states."""
        return float(np.linalg.det(2.0 * self.cov))

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return abs(self.purity_determinant() - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    """Heisenberg action r -> S r + d of a Gaussian unitary."""
    S: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        d = np.asarray(self.d, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ArgumentError(f"S must be square of even size, got {S.shape}")
        if d.shape != (S.shape[0],):
            raise ArgumentError(f"d must have length {S.shape[0]}, got {d.shape}")
        require_finite(S, "symplectic matrix")
        require_finite(d, "displacement")
        om = omega(S.shape[0] // 2)
        scale = max(1.0, float(np.linalg.norm(S, 2)) ** 2)
        err = np.max(np.abs(S @ om @ S.T - om))
        if err > SYMPLECTIC_TOL * scale:
            raise NumericError(f"matrix is not symplectic (residual {err:.3e})")
        object.__setattr__(self, "S", frozen_array(S))
        object.__setattr__(self, "d", frozen_array(d))

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    @classmethod
    def identity(cls, n: int) -> "SymplecticMap":
        return cls(np.eye(2 * n), np.zeros(2 * n))

    def inverse(self) -> "SymplecticMap":
        """Map of U^-1: S^-1 = -Omega S^T Omega, d -> -S^-1 d."""
        om = omega(self.n_modes)
        s_inv = -om @ self.S.T @ om
        return SymplecticMap(s_inv, -s_inv @ self.d)

    def then(self, other: "SymplecticMap") -> "SymplecticMap":
        """Apply `self` to a state first, then `other`."""
        if other.n_modes != self.n_modes:
            raise ArgumentError("cannot compose maps on different mode counts")
        return SymplecticMap(other.S @ self.S, other.S @ self.d + other.d)


def compose(*maps: SymplecticMap) -> SymplecticMap:
    """Maps listed in the order they act on the state."""
    if not maps:
        raise ArgumentError("compose needs at least one map")
    out = maps[0]
    for m in maps[1:]:
        out = out.then(m)
    return out


@dataclass(frozen=True, eq=False)
class QuadraticGenerator:
    """Hermitian quadratic Hamiltonian H = 1/2 r^T A r + b^T r."""
    A: np.ndarray
    b: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise ArgumentError(f"A must be square of even size, got {A.shape}")
        b = np.zeros(A.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        if b.shape != (A.shape[0],):
            raise ArgumentError(f"b must have length {A.shape[0]}, got {b.shape}")
        require_finite(A, "generator matrix")
        require_finite(b, "generator linear term")
        if np.max(np.abs(A - A.T)) > 1e-12:
            raise ArgumentError("generator matrix is not symmetric")
        object.__setattr__(self, "A", frozen_array(0.5 * (A + A.T)))
        object.__setattr__(self, "b", frozen_array(b))

    @property
    def n_modes(self) -> int:
        return self.A.shape[0] // 2

    def flow_matrix(self) -> np.ndarray:
        """Omega A; its eigenvalues are the Heisenberg rates."""
        return omega(self.n_modes) @ self.A


# ============================================================================
# OPERATIONS
# ============================================================================

def vacuum(n: int) -> GaussianState:
    if int(n) != n or n < 1:
        raise ArgumentError(f"mode count must be >= 1, got {n}")
    return GaussianState(np.zeros(2 * n), 0.5 * np.eye(2 * n))


def symplectic_of_generator(g: QuadraticGenerator, t: float = 1.0) -> SymplecticMap:
    """
    Heisenberg map of exp(-i t H).

    dr/dt = Omega A r + Omega b; the displacement is read off the augmented
    exponential exp(t [[Omega A, Omega b], [0, 0]]).
    """
    require_finite(np.asarray(t, dtype=float), "time")
    n2 = 2 * g.n_modes
    om = omega(g.n_modes)
    aug = np.zeros((n2 + 1, n2 + 1))
    aug[:n2, :n2] = om @ g.A
    aug[:n2, n2] = om @ g.b
    flow = linalg.expm(t * aug)
    return SymplecticMap(flow[:n2, :n2], flow[:n2, n2])


def apply_map(s: GaussianState, m: SymplecticMap) -> GaussianState:
    if s.n_modes != m.n_modes:
        raise ArgumentError(f"state has {s.n_modes} modes, map has {m.n_modes}")
    cov = m.S @ s.cov @ m.S.T
    return GaussianState(m.S @ s.mean + m.d, 0.5 * (cov + cov.T))


def _check_direction(s: GaussianState, c: Sequence[float]) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (2 * s.n_modes,):
        raise ArgumentError(f"direction must have length {2 * s.n_modes}, got {c.shape}")
    return c


def quad_variance(s: GaussianState, c: Sequence[float]) -> float:
    """Variance of the observable c^T r."""
    c = _check_direction(s, c)
    return float(c @ s.cov @ c)


def quad_mean(s: GaussianState, c: Sequence[float]) -> float:
    c = _check_direction(s, c)
    return float(c @ s.mean)


def overlap(s1: GaussianState, s2: GaussianState) -> float:
    """Fidelity |<psi1|psi2>|^2 of two pure Gaussian states."""
    if s1.n_modes != s2.n_modes:
        raise ArgumentError("overlap needs equal mode counts")
    for s in (s1, s2):
        if not s.is_pure():
            raise UnsupportedInputError(
                f"overlap needs pure states (det(2 cov) = {s.purity_determinant():.12f})"
            )
    total = s1.cov + s2.cov
    delta = s2.mean - s1.mean
    quad = float(delta @ np.linalg.solve(total, delta))
    return float(np.exp(-0.5 * quad) / np.sqrt(np.linalg.det(total)))


def poisson_bracket_matrix(a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    """Quadratic-form matrix of the commutator of two quadratic generators (up to -i)."""
    n = np.asarray(a1).shape[0] // 2
    om = omega(n)
    return a1 @ om @ a2 - a2 @ om @ a1


# ============================================================================
# LADDER BILINEARS
# ============================================================================

def ladder_to_quadrature(
    n: int,
    pair: Optional[np.ndarray] = None,
    number: Optional[np.ndarray] = None,
    linear: Optional[np.ndarray] = None,
    label: str = "",
) -> QuadraticGenerator:
    """
    Rewrite a ladder-operator Hamiltonian in quadratures.

        H = 1/2 sum_ij (M_ij a_i+ a_j+ + h.c.) + sum_ij N_ij a_i+ a_j
            + sum_i (alpha_i a_i+ + h.c.)

    with M complex symmetric (pair), N Hermitian (number) and alpha (linear).
    Writing M = M_R + i M_I and N = N_R + i N_I:

        A_XX = M_R + N_R    A_PP = N_R - M_R
        A_XP = M_I - N_I    A_PX = M_I + N_I
        b_X = sqrt2 Re alpha,  b_P = sqrt2 Im alpha

    The number term drops its c-number 1/2 tr N, which has no Heisenberg effect.
    """
    M = np.zeros((n, n), dtype=complex) if pair is None else np.asarray(pair, dtype=complex)
    N = np.zeros((n, n), dtype=complex) if number is None else np.asarray(number, dtype=complex)
    alpha = np.zeros(n, dtype=complex) if linear is None else np.asarray(linear, dtype=complex)
    if M.shape != (n, n) or N.shape != (n, n) or alpha.shape != (n,):
        raise ArgumentError("ladder coefficient shapes do not match the mode count")
    if np.max(np.abs(M - M.T)) > 1e-12:
        raise ArgumentError("pair matrix must be symmetric")
    if np.max(np.abs(N - N.conj().T)) > 1e-12:
        raise ArgumentError("number matrix must be Hermitian")

    A = np.block([
        [M.real + N.real, M.imag - N.imag],
        [M.imag + N.imag, N.real - M.real],
    ])
    b = np.sqrt(2.0) * np.concatenate([alpha.real, alpha.imag])
    return QuadraticGenerator(A, b, label)


# ============================================================================
# DECOMPOSITION AND FOCK REALIZATION
# ============================================================================

def passive_unitary(orth: np.ndarray) -> np.ndarray:
    """n x n unitary W of an orthogonal symplectic [[Re W, -Im W], [Im W, Re W]]."""
    n = orth.shape[0] // 2
    return orth[:n, :n] + 1j * orth[n:, :n]


def _symplectic_eigenbasis(p: np.ndarray, tol: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orthogonal symplectic O and factors mu <= 1 with P = O diag(mu, 1/mu) O^T
    for a symmetric positive-definite symplectic P.
    """
    n = p.shape[0] // 2
    om_t = omega(n).T
    w, v = np.linalg.eigh(p)
    squeezed = [(w[k], v[:, k]) for k in range(2 * n) if w[k] < 1.0 - tol]
    neutral = v[:, np.abs(w - 1.0) <= tol]

    columns: List[np.ndarray] = []
    mus: List[float] = []
    for mu, u in squeezed:
        columns.append(u)
        mus.append(mu)

    # unit eigenspace is Omega-invariant: peel off (u, Omega^T u) pairs
    chosen: List[np.ndarray] = [c for u in columns for c in (u, om_t @ u)]
    for k in range(neutral.shape[1]):
        if len(columns) == n:
            break
        u = neutral[:, k].copy()
        for c in chosen:
            u -= (c @ u) * c
        norm = np.linalg.norm(u)
        if norm < 1e-6:
            continue
        u /= norm
        columns.append(u)
        mus.append(1.0)
        chosen.extend([u, om_t @ u])

    if len(columns) != n:
        raise NumericError("could not build a symplectic eigenbasis")
    u_block = np.column_stack(columns)
    orth = np.hstack([u_block, om_t @ u_block])
    return orth, np.array(mus)


def decompose(m: SymplecticMap) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    S = L diag(mu, 1/mu) R with L, R orthogonal symplectic.

    Returns (W_left, mu, W_right) with the passive factors as n x n unitaries.
    """
    orth, pos = linalg.polar(m.S)
    basis, mus = _symplectic_eigenbasis(pos)
    return passive_unitary(orth @ basis), mus, passive_unitary(basis.T)


def fock_realization(space: FockSpace, m: SymplecticMap) -> FockOperator:
    """
    Fock matrix of the Gaussian unitary with Heisenberg map `m`, up to a global phase.

    U = D(alpha) Pi(W_left) Z(mu) Pi(W_right); passive factors conserve photon
    number, so displacement-free maps are exact on every block whose total
    photon number is at most d - 1.
    """
    if space.n_modes != m.n_modes:
        raise ArgumentError("space and map mode counts differ")
    n = space.n_modes
    w_left, mus, w_right = decompose(m)
    factors = []
    if np.any(m.d):
        for k in range(n):
            alpha = (m.d[k] + 1j * m.d[n + k]) / np.sqrt(2.0)
            if alpha != 0:
                factors.append(displacement_operator(space, k + 1, alpha))
    factors.append(passive_operator(space, w_left))
    for k, mu in enumerate(mus):
        if abs(mu - 1.0) > 1e-15:
            factors.append(squeezer_operator(space, k + 1, -np.log(mu)))
    factors.append(passive_operator(space, w_right))
    return product_of_single_mode(space, factors)


def state_generator(s: GaussianState) -> SymplecticMap:
    """A map taking the vacuum to the pure state `s` (symmetric symplectic root of 2 cov)."""
    if not s.is_pure():
        raise UnsupportedInputError("state_generator needs a pure state")
    w, v = np.linalg.eigh(2.0 * s.cov)
    root = v @ np.diag(np.sqrt(w)) @ v.T
    return SymplecticMap(0.5 * (root + root.T), s.mean)


def moments_of_vector(v: FockVector) -> Tuple[np.ndarray, np.ndarray]:
    """First and symmetrized second moments of a normalized Fock vector."""
    space = v.space
    n = space.n_modes
    ops = [quadratures(space, k + 1)[0].matrix for k in range(n)]
    ops += [quadratures(space, k + 1)[1].matrix for k in range(n)]
    applied = [op @ v.coeffs for op in ops]
    mean = np.array([np.vdot(v.coeffs, w).real for w in applied])
    second = np.empty((2 * n, 2 * n))
    for i in range(2 * n):
        for j in range(2 * n):
            second[i, j] = np.vdot(applied[i], applied[j]).real
    cov = 0.5 * (second + second.T) - np.outer(mean, mean)
    return mean, cov

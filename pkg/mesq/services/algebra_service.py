"""
MESQ - Algebra Service

Closed-form structure matrices N, F, F^-1, G, G', G'' and the three quadratic
SU(1,1) realizations built from them, with their disentangling identities.

    K+ = 1/2 a+ M a+~ ,  K- = K+^dagger,  M in {G, G', G''}
    K0 = 1/2 a+ a + n/4        (G)
         1/2 a+ G' a + 1/4     (G')
         1/2 a+ G'' a + (n-1)/4 (G'')
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from mesq.config import config
from mesq.core.base import ArgumentError, RangeError, Realization, StructureKind, frozen_array
from mesq.services.fock_engine import (
    FockOperator,
    FockSpace,
    commutator,
    identity,
    low_subspace_project,
    make_ladder,
    op_exp,
    op_norm,
    padded_single_mode_unitary,
    passive_operator,
)
from mesq.services.gaussian_engine import (
    SymplecticMap,
    ladder_to_quadrature,
    symplectic_of_generator,
)

logger = logging.getLogger(__name__)


# ============================================================================
# STRUCTURE MATRICES
# ============================================================================

@dataclass(frozen=True, eq=False)
class StructureMatrix:
    kind: StructureKind
    n: int
    entries: np.ndarray


def _diag_offdiag(size: int, diag: float, off: float) -> np.ndarray:
    return np.full((size, size), off) + (diag - off) * np.eye(size)


def structure_matrix(kind, n: int) -> StructureMatrix:
    """Closed-form matrix of the given kind for n modes (n >= 2)."""
    kind = StructureKind(kind)
    if int(n) != n or n < 2:
        raise ArgumentError(f"structure matrices need n >= 2, got {n}")
    m = n - 1
    if kind is StructureKind.N:
        entries = _diag_offdiag(m, (n - 1) / n, -1.0 / n)
    elif kind is StructureKind.F:
        entries = _diag_offdiag(m, (n - 1) / (2.0 * n), -1.0 / (2.0 * n))
    elif kind is StructureKind.FINV:
        entries = _diag_offdiag(m, 4.0, 2.0)
    elif kind is StructureKind.G:
        entries = _diag_offdiag(n, 1.0 - 2.0 / n, -2.0 / n)
    elif kind is StructureKind.GP:
        entries = np.full((n, n), 1.0 / n)
    else:
        entries = _diag_offdiag(n, (n - 1) / n, -1.0 / n)
    return StructureMatrix(kind, n, frozen_array(entries))


def matrix_identity_residuals(n: int) -> Dict[str, float]:
    """Max-entry residuals of the closed-form matrix identities at mode count n."""
    F = structure_matrix(StructureKind.F, n).entries
    Finv = structure_matrix(StructureKind.FINV, n).entries
    G = structure_matrix(StructureKind.G, n).entries
    Gp = structure_matrix(StructureKind.GP, n).entries
    Gpp = structure_matrix(StructureKind.GPP, n).entries
    eye = np.eye(n)

    eig = np.sort(np.linalg.eigvalsh(G))
    expected_eig = np.array([-1.0] + [1.0] * (n - 1))
    return {
        "F_Finv_identity": float(np.max(np.abs(F @ Finv - np.eye(n - 1)))),
        "G_involution": float(np.max(np.abs(G @ G - eye))),
        "Gp_projector": float(np.max(np.abs(Gp @ Gp - Gp))),
        "Gpp_projector": float(np.max(np.abs(Gpp @ Gpp - Gpp))),
        "Gp_Gpp_orthogonal": float(np.max(np.abs(Gp @ Gpp))),
        "G_from_Gp": float(np.max(np.abs(G - (eye - 2.0 * Gp)))),
        "Gp_Gpp_complete": float(np.max(np.abs(Gp + Gpp - eye))),
        "G_spectrum": float(np.max(np.abs(eig - expected_eig))),
    }


# ============================================================================
# SU(1,1) REALIZATIONS
# ============================================================================

def _pair_and_number(realization: Realization, n: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """(pair matrix of K+, number matrix of K0, K0 c-number)."""
    pair = structure_matrix(realization.structure, n).entries
    if realization is Realization.G:
        return pair, np.eye(n), n / 4.0
    if realization is Realization.GP:
        return pair, pair, 0.25
    return pair, pair, (n - 1) / 4.0


@dataclass(frozen=True, eq=False)
class Su11Triple:
    k_plus: FockOperator
    k_minus: FockOperator
    k_zero: FockOperator
    realization: Realization


def su11_generators(space: FockSpace, realization, n: int = None) -> Su11Triple:
    """K+, K-, K0 of a realization on `space`."""
    realization = Realization(realization)
    if n is not None and n != space.n_modes:
        raise ArgumentError(f"space has {space.n_modes} modes, realization asked for n={n}")
    n = space.n_modes
    if n < 2:
        raise ArgumentError("SU(1,1) realizations need at least two modes")
    pair, number, shift = _pair_and_number(realization, n)

    dim = space.dimension
    kp = np.zeros((dim, dim))
    k0 = np.zeros((dim, dim))
    for i in range(n):
        a_i, ad_i = make_ladder(space, i + 1)
        for j in range(n):
            a_j, ad_j = make_ladder(space, j + 1)
            if pair[i, j]:
                kp += 0.5 * pair[i, j] * (ad_i.matrix @ ad_j.matrix)
            if number[i, j]:
                k0 += 0.5 * number[i, j] * (ad_i.matrix @ a_j.matrix)
    k0 += shift * np.eye(dim)

    k_plus = FockOperator(space, kp)
    return Su11Triple(k_plus, k_plus.dagger(), FockOperator(space, k0), realization)


def closure_residuals(triple: Su11Triple) -> Dict[str, float]:
    """
    Norms of [K-,K+] - 2K0, [K0,K+] - K+, [K0,K-] + K- projected to
    total photon number <= d - 4.
    """
    space = triple.k_plus.space
    level = space.cutoff - 4
    if level < 0:
        raise ArgumentError("closure checks need cutoff >= 4")

    def projected(op: FockOperator) -> float:
        return op_norm(low_subspace_project(op, level))

    kp, km, k0 = triple.k_plus, triple.k_minus, triple.k_zero
    return {
        "Km_Kp": projected(commutator(km, kp) - 2.0 * k0),
        "K0_Kp": projected(commutator(k0, kp) - kp),
        "K0_Km": projected(commutator(k0, km) + km),
    }


def vacuum_k_zero(triple: Su11Triple) -> float:
    return float(triple.k_zero.matrix[0, 0].real)


# ============================================================================
# DISENTANGLING
# ============================================================================

def _check_envelope(lam: float) -> None:
    if not np.isfinite(lam) or abs(lam) > config.BCH_LAMBDA_MAX:
        raise RangeError(f"|lambda| must be <= {config.BCH_LAMBDA_MAX} for Fock disentangling, got {lam}")


def _rotated_squeeze(space: FockSpace, pair: np.ndarray, amount: float) -> FockOperator:
    """
    exp[amount/2 (a+ M a+~ - a M a~)] for real symmetric M, exact on low blocks.

    With M = O^T diag(D) O and Pi+ a Pi = O a the operator is
    Pi+ (prod_k exp[amount D_k/2 (a_k+^2 - a_k^2)]) Pi.
    """
    w, v = np.linalg.eigh(pair)
    rot = v.T
    if np.linalg.det(rot) < 0:
        rot[0] *= -1.0
    pi = passive_operator(space, rot)

    core = np.eye(1)
    for dk in w:
        mu = amount * dk
        block = padded_single_mode_unitary(space, lambda a, mu=mu: 0.5 * mu * (a.T @ a.T - a @ a))
        core = np.kron(core, block)
    return FockOperator(space, pi.matrix.conj().T @ core @ pi.matrix)


def disentangled_squeeze(
    space: FockSpace, realization, lam: float, sign: int = 1, lowering_sign: int = None
) -> Tuple[FockOperator, FockOperator]:
    """
    direct   = exp[sign lam (K+ - K-)]
    factored = exp(sign K+ tanh lam) exp(2 K0 ln sech lam) exp(lowering_sign K- tanh lam)

    `lowering_sign` defaults to -sign (the normal-ordered pattern); pass the
    opposite value to test an alternative printed form.
    """
    realization = Realization(realization)
    _check_envelope(lam)
    if sign not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sign}")
    if lowering_sign is None:
        lowering_sign = -sign
    triple = su11_generators(space, realization)
    pair = structure_matrix(realization.structure, space.n_modes).entries

    direct = _rotated_squeeze(space, pair, sign * lam)
    t = np.tanh(lam)
    log_sech = -np.log(np.cosh(lam))
    raise_part = op_exp(sign * t * triple.k_plus)
    middle = op_exp(2.0 * log_sech * triple.k_zero)
    lower_part = op_exp(lowering_sign * t * triple.k_minus)
    factored = raise_part @ middle @ lower_part
    return direct, factored


def disentangling_residual(space: FockSpace, realization, lam: float, sign: int = 1,
                           lowering_sign: int = None) -> float:
    """Projected norm of direct - factored at total photon number <= d - 6."""
    direct, factored = disentangled_squeeze(space, realization, lam, sign, lowering_sign)
    level = max(space.cutoff - 6, 0)
    return op_norm(low_subspace_project(direct - factored, level))


def su11_symplectic(n: int, realization, lam: float, sign: int = 1) -> SymplecticMap:
    """Heisenberg map of exp[sign lam (K+ - K-)] for any lambda."""
    realization = Realization(realization)
    pair = structure_matrix(realization.structure, n).entries
    # sign lam (K+ - K-) = -iH with H = 1/2 (i sign lam M a+a+ + h.c.)
    g = ladder_to_quadrature(n, pair=1j * sign * lam * pair, label=f"su11-{realization.value}")
    return symplectic_of_generator(g, 1.0)


def identity_residual(op: FockOperator, level: int) -> float:
    return op_norm(low_subspace_project(op - identity(op.space), level))

"""
MESQ - Algebra Service Tests

Run with: python -m pytest mesq/tests/test_algebra_service.py -v
"""

import numpy as np
import pytest

from mesq.core.base import ArgumentError, RangeError, Realization, StructureKind
from mesq.services.algebra_service import (
    closure_residuals,
    disentangling_residual,
    matrix_identity_residuals,
    structure_matrix,
    su11_generators,
    su11_symplectic,
    vacuum_k_zero,
)
from mesq.services.fock_engine import FockSpace


class TestStructureMatrices:
    """Test the closed-form matrices."""

    @pytest.mark.parametrize("n", range(2, 9))
    def test_identities(self, n):
        """Test F F^-1 = I, G^2 = I, projector relations and the spectrum of G."""
        residuals = matrix_identity_residuals(n)
        assert set(residuals) == {
            "F_Finv_identity", "G_involution", "Gp_projector", "Gpp_projector",
            "Gp_Gpp_orthogonal", "G_from_Gp", "Gp_Gpp_complete", "G_spectrum",
        }
        assert max(residuals.values()) <= 1e-12

    def test_shapes(self):
        """Test that N, F, F^-1 are (n-1)x(n-1) and G-family are n x n."""
        assert structure_matrix(StructureKind.F, 4).entries.shape == (3, 3)
        assert structure_matrix("Gp", 4).entries.shape == (4, 4)

    def test_n2_values(self):
        """Test G = [[0, -1], [-1, 0]] and G' = J/2 at n = 2."""
        assert np.allclose(structure_matrix(StructureKind.G, 2).entries, [[0.0, -1.0], [-1.0, 0.0]])
        assert np.allclose(structure_matrix(StructureKind.GP, 2).entries, 0.5)

    def test_too_few_modes(self):
        """Test that n < 2 is rejected."""
        with pytest.raises(ArgumentError):
            structure_matrix(StructureKind.G, 1)

    def test_entries_are_read_only(self):
        """Test that structure matrices cannot be modified."""
        m = structure_matrix(StructureKind.G, 3)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0


class TestSu11Realizations:
    """Test the quadratic SU(1,1) realizations."""

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("realization", list(Realization))
    def test_closure(self, realization, n):
        """Test the three commutation relations below level d - 4 at d = 12."""
        triple = su11_generators(FockSpace(n, 12), realization)
        residuals = closure_residuals(triple)
        assert max(residuals.values()) <= 1e-10

    @pytest.mark.parametrize(
        "realization,expected",
        [(Realization.G, 0.75), (Realization.GP, 0.25), (Realization.GPP, 0.5)],
    )
    def test_vacuum_k_zero(self, realization, expected):
        """Test <vac|K0|vac> = n/4, 1/4, (n-1)/4 at n = 3."""
        triple = su11_generators(FockSpace(3, 4), realization)
        assert vacuum_k_zero(triple) == pytest.approx(expected)

    def test_k_minus_is_adjoint(self):
        """Test K- = K+^dagger."""
        triple = su11_generators(FockSpace(2, 6), Realization.G)
        assert np.array_equal(triple.k_minus.matrix, triple.k_plus.matrix.conj().T)

    def test_mode_count_mismatch(self):
        """Test that an explicit n must match the space."""
        with pytest.raises(ArgumentError):
            su11_generators(FockSpace(2, 4), Realization.G, n=3)


class TestDisentangling:
    """Test direct against factored squeezes."""

    @pytest.mark.parametrize(
        "realization,sign",
        [(Realization.G, 1), (Realization.GP, -1), (Realization.GPP, 1)],
    )
    def test_factored_form_matches(self, realization, sign):
        """Test the disentangled product at lambda = 0.3, n = 2, d = 16."""
        residual = disentangling_residual(FockSpace(2, 16), realization, 0.3, sign)
        assert residual <= 1e-8

    def test_three_mode_relative_squeeze(self):
        """Test the G'' disentangled product at n = 3, lambda = 0.25."""
        residual = disentangling_residual(FockSpace(3, 12), Realization.GPP, 0.25, 1)
        assert residual <= 1e-8

    def test_wrong_lowering_sign_is_detected(self):
        """Test that flipping the lowering factor's sign breaks the identity."""
        residual = disentangling_residual(FockSpace(2, 16), Realization.GPP, 0.3, 1, lowering_sign=1)
        assert residual > 1e-3

    def test_lambda_envelope(self):
        """Test that |lambda| above the Fock envelope is a range error."""
        with pytest.raises(RangeError):
            disentangling_residual(FockSpace(2, 8), Realization.G, 1.5)

    def test_bad_sign(self):
        """Test that sign must be +1 or -1."""
        with pytest.raises(ArgumentError):
            disentangling_residual(FockSpace(2, 8), Realization.G, 0.3, sign=2)

    def test_symplectic_form_is_symplectic_at_large_lambda(self):
        """Test that the Gaussian map exists for any lambda."""
        m = su11_symplectic(3, Realization.G, 2.5)
        assert m.S.shape == (6, 6)

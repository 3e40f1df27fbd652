"""
MESQ - State Service Tests

Run with: python -m pytest mesq/tests/test_state_service.py -v
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesq.core.base import ArgumentError, EigenKind, EprVariant, LabelVariant, NumericError, RangeError
from mesq.services.dynamics_service import generate_epr
from mesq.services.fock_engine import FockSpace, FockVector, identity, op_norm
from mesq.services.gaussian_engine import overlap
from mesq.services.state_service import (
    GaussianKet,
    StateLabel,
    completeness_quadrature_check,
    displacement_y,
    eigen_residual,
    entangling_factorization,
    entangling_fock_operator,
    entangling_fock_transport,
    entangling_map,
    factor_eigenstate,
    ideal_entangled_vector,
    ideal_ket,
    ideal_prefactor,
    ket_overlap,
    label_means,
    label_variances,
    overlap_width,
    random_labels,
    regularized_entangled_state,
    relative_coordinate_direction,
    single_mode_residual,
    tanh_regularized_ket,
)

label_values = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


class TestLabels:
    """Test labels and the displacement vector y."""

    def test_from_values(self):
        """Test that the first value is the scalar and the rest follow."""
        label = StateLabel.from_values(LabelVariant.P_CHI, [0.5, -0.2, 0.1])
        assert label.n_modes == 3
        assert label.values() == [0.5, -0.2, 0.1]

    def test_needs_two_values(self):
        """Test that a single value cannot label an entangled state."""
        with pytest.raises(ArgumentError):
            StateLabel.from_values(LabelVariant.P_CHI, [1.0])

    def test_non_finite_label(self):
        """Test that NaN labels raise a numeric error."""
        with pytest.raises(NumericError):
            StateLabel.p_chi(float("nan"), [0.0])

    def test_displacement_p_chi(self):
        """Test y_1 = sqrt2/n (i p + sum chi) and y_i = y_1 - sqrt2 chi_i."""
        y = displacement_y(StateLabel.p_chi(1.0, [0.5]), 2).y
        assert y[0] == pytest.approx(math.sqrt(2.0) / 2 * (1j + 0.5))
        assert y[1] == pytest.approx(y[0] - math.sqrt(2.0) * 0.5)

    def test_displacement_chi_p(self):
        """Test y_1 = sqrt2/n (chi + i sum p) and y_i = y_1 - i sqrt2 p_i."""
        y = displacement_y(StateLabel.chi_p(0.3, [0.4]), 2).y
        assert y[0] == pytest.approx(math.sqrt(2.0) / 2 * (0.3 + 0.4j))
        assert y[1] == pytest.approx(y[0] - 1j * math.sqrt(2.0) * 0.4)

    def test_label_length_mismatch(self):
        """Test that the label must have n entries."""
        with pytest.raises(ArgumentError):
            displacement_y(StateLabel.p_chi(0.0, [0.0]), 3)

    def test_relative_index_bounds(self):
        """Test that Q_1 does not exist."""
        with pytest.raises(ArgumentError):
            relative_coordinate_direction(3, 1)


class TestIdealVectors:
    """Test truncated ideal states and their eigen residuals."""

    def test_label_zero_coefficients(self):
        """Test c_00 != 0, c_10 = 0 and c_11 / c_00 = 1 at n = 2, d = 4."""
        v = ideal_entangled_vector(FockSpace(2, 4), StateLabel.zero(2))
        assert v.amplitude([0, 0]) != 0.0
        assert v.amplitude([1, 0]) == 0.0
        assert v.amplitude([1, 1]) / v.amplitude([0, 0]) == pytest.approx(1.0, abs=1e-14)

    def test_three_mode_label_zero_coefficients(self):
        """Test c_110 / c_000 = 2/3 and c_200 / c_000 = -sqrt2/6 at n = 3."""
        v = ideal_entangled_vector(FockSpace(3, 4), StateLabel.zero(3))
        c0 = v.amplitude([0, 0, 0])
        assert v.amplitude([1, 1, 0]) / c0 == pytest.approx(2.0 / 3.0, abs=1e-14)
        assert v.amplitude([2, 0, 0]) / c0 == pytest.approx(-math.sqrt(2.0) / 6.0, abs=1e-14)
        assert v.amplitude([1, 0, 0]) == 0.0

    @pytest.mark.parametrize("n,cutoff", [(2, 8), (3, 6)])
    @pytest.mark.parametrize("variant", list(LabelVariant))
    def test_label_zero_is_permutation_invariant(self, n, cutoff, variant):
        """Test that relabelling the modes leaves the label-0 vector unchanged."""
        coeffs = ideal_entangled_vector(FockSpace(n, cutoff), StateLabel.zero(n, variant)).coeffs
        box = coeffs.reshape((cutoff,) * n)
        for perm in itertools.permutations(range(n)):
            assert np.allclose(np.transpose(box, perm), box, atol=1e-14)

    @pytest.mark.parametrize("n,cutoff", [(2, 14), (3, 10)])
    @pytest.mark.parametrize("variant", list(LabelVariant))
    def test_eigen_residual_random_labels(self, n, cutoff, variant):
        """Test twenty seeded labels per family."""
        space = FockSpace(n, cutoff)
        for label in random_labels(n, 20, 7, variant):
            report = eigen_residual(ideal_entangled_vector(space, label), label)
            assert report.max_ratio <= 1e-10, label.values()

    @pytest.mark.parametrize("variant", list(LabelVariant))
    def test_eigen_residual_two_modes(self, variant):
        """Test that every defining observable has residual below 1e-10."""
        label = StateLabel.from_values(variant, [0.3, -0.2])
        report = eigen_residual(ideal_entangled_vector(FockSpace(2, 14), label), label)
        assert report.level == 11
        assert report.max_ratio <= 1e-10

    @settings(max_examples=10, deadline=None)
    @given(values=st.lists(label_values, min_size=3, max_size=3))
    def test_eigen_residual_three_modes(self, values):
        """Test random three-mode P_CHI labels at d = 8."""
        label = StateLabel.from_values(LabelVariant.P_CHI, values)
        report = eigen_residual(ideal_entangled_vector(FockSpace(3, 8), label), label)
        assert report.max_ratio <= 1e-10

    def test_wrong_label_is_detected(self):
        """Test that a shifted eigenvalue leaves a large residual."""
        label = StateLabel.p_chi(0.4, [0.1])
        wrong = StateLabel.p_chi(1.4, [0.1])
        report = eigen_residual(ideal_entangled_vector(FockSpace(2, 14), label), wrong)
        assert report.ratios["P"] > 0.5

    def test_zero_vector_is_degenerate(self):
        """Test that a vanishing projected vector raises a numeric error."""
        space = FockSpace(2, 6)
        with pytest.raises(NumericError):
            eigen_residual(FockVector(space, np.zeros(space.dimension)), StateLabel.zero(2))

    def test_series_matches_recursion(self):
        """Test that the power series equals the Hermite recursion times the prefactor."""
        label = StateLabel.chi_p(0.2, [-0.5])
        space = FockSpace(2, 10)
        series = ideal_entangled_vector(space, label).coeffs * ideal_prefactor(2)
        recursion = ideal_ket(label).vector(space).coeffs
        assert np.allclose(series, recursion, atol=1e-12)

    @pytest.mark.parametrize("kind", list(EigenKind))
    def test_factor_eigenstate(self, kind):
        """Test single-mode coordinate and momentum eigenstates."""
        space = FockSpace(1, 16)
        v = factor_eigenstate(space, 1, 0.4, kind)
        assert single_mode_residual(v, 1, 0.4, kind) <= 1e-10


class TestGaussianKets:
    """Test kets, overlaps and the entangling factorization."""

    def test_normalized_self_overlap(self):
        """Test <k|k> = 1 after normalization."""
        ket = GaussianKet([0.2 + 0.1j], [[0.3]]).normalized()
        assert ket_overlap(ket, ket) == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_overlap(self):
        """Test that the vacuum ket has unit norm."""
        vac = GaussianKet.vacuum(2)
        assert ket_overlap(vac, vac) == pytest.approx(1.0)

    def test_pair_shape(self):
        """Test that the pair matrix must be n x n."""
        with pytest.raises(ArgumentError):
            GaussianKet([0.0, 0.0], [[0.0]])

    def test_factorization(self):
        """Test exp(i X_1 P_2)|p=1, chi=0.5> = e^{-i p chi / 2} |p>_1 |-chi>_2."""
        report = entangling_factorization(StateLabel.p_chi(1.0, [0.5]), 14)
        assert report.overlap_defect <= 1e-8
        assert report.scalar_error <= 1e-8
        assert report.shape_residual <= 1e-10
        assert report.expected_scalar == pytest.approx(np.exp(-0.25j))

    def test_factorization_needs_p_chi(self):
        """Test that the CHI_P family is rejected."""
        with pytest.raises(ArgumentError):
            entangling_factorization(StateLabel.chi_p(0.0, [0.0]), 8)

    def test_entangling_fock_operator_is_unitary(self):
        """Test U+ U = I for the truncated exponential."""
        space = FockSpace(2, 8)
        u = entangling_fock_operator(space)
        assert op_norm(u.dagger() @ u - identity(space)) <= 1e-10

    @pytest.mark.parametrize("label", [StateLabel.p_chi(0.5, [-0.25]), StateLabel.p_chi(-0.3, [0.4])])
    def test_literal_operator_transports_states(self, label):
        """Test the truncated exp(i X_1 P_2) against the Gaussian construction at d = 30."""
        transport = entangling_fock_transport(label, 30)
        assert set(transport) == {"forward", "backward"}
        assert max(transport.values()) <= 1e-3

    def test_transport_needs_p_chi(self):
        """Test that the CHI_P family is rejected."""
        with pytest.raises(ArgumentError):
            entangling_fock_transport(StateLabel.chi_p(0.0, [0.0]), 10)

    def test_entangling_map_action(self):
        """Test X_2 -> X_2 - X_1 and P_1 -> P_1 + P_2 at n = 2."""
        s = entangling_map(2).S
        assert np.allclose(s, [[1, 0, 0, 0], [-1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]], atol=1e-14)


class TestRegularizedStates:
    """Test regularized states, widths and completeness."""

    @pytest.mark.parametrize(
        "label",
        [StateLabel.p_chi(0.7, [-0.3]), StateLabel.chi_p(0.4, [0.2])],
    )
    def test_means_and_variances(self, label):
        """Test means equal the label and variances equal e^{-2r}/2."""
        r = 1.2
        state = regularized_entangled_state(2, label, r)
        means = label_means(state)
        for value, name in zip(label.values(), means):
            assert means[name] == pytest.approx(value, abs=1e-12)
        for var in label_variances(state).values():
            assert var == pytest.approx(0.5 * math.exp(-2.0 * r), rel=1e-10)

    def test_negative_squeezing(self):
        """Test that r < 0 is rejected."""
        with pytest.raises(ArgumentError):
            regularized_entangled_state(2, StateLabel.zero(2), -0.1)

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_overlap_width(self, r):
        """Test sigma = e^{-r}."""
        assert overlap_width(2, r) == pytest.approx(math.exp(-r), rel=1e-8)

    def test_network_fidelity(self):
        """Test the regularized label-0 state against the network EPR state at r = 1."""
        reg = regularized_entangled_state(2, StateLabel.zero(2), 1.0).gaussian
        epr = generate_epr(2, 1.0, EprVariant.P_CHI_ZERO)
        expected = 1.0 / (1.0 + math.cosh(2.0) * math.exp(-2.0) / 4.0)
        assert overlap(reg, epr) == pytest.approx(expected, abs=1e-10)
        assert expected == pytest.approx(0.887082, abs=1e-6)

    def test_tanh_form_matches_network(self):
        """Test that the tanh-scaled two-mode ket is the network EPR state."""
        epr = generate_epr(2, 1.0, EprVariant.P_CHI_ZERO)
        tanh_ket = tanh_regularized_ket(StateLabel.zero(2), 1.0)
        fidelity = abs(ket_overlap(tanh_ket, GaussianKet.from_state(epr))) ** 2
        assert fidelity == pytest.approx(1.0, abs=1e-10)

    def test_tanh_form_is_two_mode(self):
        """Test that the tanh form rejects n != 2."""
        with pytest.raises(ArgumentError):
            tanh_regularized_ket(StateLabel.zero(3), 1.0)

    def test_completeness(self):
        """Test that the regularized family resolves the identity at r = 2."""
        report = completeness_quadrature_check(2.0)
        assert report.deviation <= 0.05
        assert report.block.shape == (4, 4)
        assert report.cutoff_block.shape == (64, 64)
        assert report.warnings == []

    def test_accumulated_block_has_full_rank(self):
        """Test that the summed integrand is close to the identity, far from a projector."""
        report = completeness_quadrature_check(2.0)
        eig = np.linalg.eigvalsh(0.5 * (report.block + report.block.conj().T))
        assert eig.min() >= 0.85
        assert eig.max() <= 1.15

    def test_single_point_is_rank_one_projector(self):
        """Test that one grid point adds a rank-1 positive block to the sum."""
        report = completeness_quadrature_check(1.5, cutoff=4)
        assert report.rank_one_defect <= 1e-6
        assert report.min_point_eigenvalue >= -1e-6

    def test_cutoff_two_box_is_the_lowest_block(self):
        """Test that at cutoff 2 the whole box is |00>, |01>, |10>, |11>."""
        report = completeness_quadrature_check(2.0, cutoff=2)
        assert report.cutoff_block.shape == (4, 4)
        assert np.allclose(report.cutoff_block, report.block, atol=0.0)
        assert report.cutoff_deviation == pytest.approx(report.deviation, abs=1e-15)

    def test_cutoff_sets_the_box(self):
        """Test that a larger cutoff widens the box but keeps the lowest block."""
        small = completeness_quadrature_check(2.0, cutoff=2, step=0.1)
        large = completeness_quadrature_check(2.0, cutoff=4, step=0.1)
        assert large.cutoff_block.shape == (16, 16)
        assert np.allclose(large.block, small.block, atol=1e-12)
        assert large.cutoff_deviation != small.cutoff_deviation

    @pytest.mark.parametrize("cutoff,error", [(1, ArgumentError), (13, RangeError)])
    def test_cutoff_bounds(self, cutoff, error):
        """Test the cutoff range of the quadrature."""
        with pytest.raises(error):
            completeness_quadrature_check(2.0, cutoff=cutoff)

    def test_coarse_grid_warns(self):
        """Test that a grid step wider than the peak is reported."""
        report = completeness_quadrature_check(2.0, step=0.2)
        assert report.warnings

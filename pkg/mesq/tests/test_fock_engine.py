"""
MESQ - Fock Engine Tests

Run with: python -m pytest mesq/tests/test_fock_engine.py -v
"""

import math

import numpy as np
import pytest

from mesq.core.base import ArgumentError, NumericError
from mesq.services.fock_engine import (
    FockOperator,
    FockSpace,
    FockVector,
    apply,
    basis_vector,
    commutator,
    conserves_number,
    displacement_operator,
    exp_raising_on_vacuum,
    identity,
    inner,
    linear_combination,
    low_subspace_project,
    make_ladder,
    op_exp,
    op_norm,
    passive_operator,
    quadratures,
    vacuum_vector,
    zero_operator,
)


class TestFockSpace:
    """Test the truncated product space."""

    def test_dimension_and_totals(self):
        """Test that dimension is d^n and totals run up to n(d-1)."""
        space = FockSpace(3, 4)
        assert space.dimension == 64
        assert space.max_total == 9
        assert space.totals[space.index_of([1, 2, 3])] == 6

    def test_row_major_order(self):
        """Test that mode 1 is the slowest index."""
        space = FockSpace(2, 5)
        assert space.index_of([0, 1]) == 1
        assert space.index_of([1, 0]) == 5

    def test_mode_out_of_range(self):
        """Test that modes are 1-based and bounded."""
        space = FockSpace(2, 4)
        with pytest.raises(ArgumentError):
            make_ladder(space, 3)
        with pytest.raises(ArgumentError):
            make_ladder(space, 0)

    def test_occupation_outside_cutoff(self):
        """Test that index_of rejects occupations at or above the cutoff."""
        with pytest.raises(ArgumentError):
            FockSpace(2, 4).index_of([4, 0])


class TestLadderOperators:
    """Test ladder operators and quadratures."""

    def test_canonical_commutator_below_edge(self, two_mode_space):
        """Test [a, a+] = I on states below the truncation edge."""
        a, ad = make_ladder(two_mode_space, 1)
        residual = low_subspace_project(commutator(a, ad) - identity(two_mode_space), two_mode_space.cutoff - 2)
        assert op_norm(residual) < 1e-12

    def test_quadrature_commutator(self, two_mode_space):
        """Test [X, P] = i with X = (a + a+)/sqrt2, P = (a - a+)/(i sqrt2)."""
        x, p = quadratures(two_mode_space, 2)
        residual = commutator(x, p) - 1j * identity(two_mode_space)
        assert op_norm(low_subspace_project(residual, two_mode_space.cutoff - 2)) < 1e-12

    def test_different_modes_commute(self, two_mode_space):
        """Test that ladder operators on different modes commute exactly."""
        a1, _ = make_ladder(two_mode_space, 1)
        _, ad2 = make_ladder(two_mode_space, 2)
        assert op_norm(commutator(a1, ad2)) == 0.0

    def test_linear_combination_length(self, two_mode_space):
        """Test that the coefficient vector must have length 2n."""
        with pytest.raises(ArgumentError):
            linear_combination(two_mode_space, [1.0, 0.0, 0.0])

    def test_numpy_scalar_times_operator(self, two_mode_space):
        """Test that numpy scalars scale operators instead of building object arrays."""
        a, _ = make_ladder(two_mode_space, 1)
        scaled = np.float64(2.0) * a
        assert isinstance(scaled, FockOperator)
        assert np.allclose(scaled.matrix, 2.0 * a.matrix)


class TestVectors:
    """Test vectors, inner products and projections."""

    def test_vacuum_and_basis(self, two_mode_space):
        """Test the vacuum and basis vectors."""
        vac = vacuum_vector(two_mode_space)
        assert vac.amplitude([0, 0]) == 1.0
        assert inner(vac, basis_vector(two_mode_space, [1, 0])) == 0.0

    def test_creation_raises_occupation(self, two_mode_space):
        """Test a+ |1,0> = sqrt2 |2,0>."""
        _, ad = make_ladder(two_mode_space, 1)
        v = apply(ad, basis_vector(two_mode_space, [1, 0]))
        assert v.amplitude([2, 0]) == pytest.approx(math.sqrt(2.0))

    def test_projection_level_bounds(self, two_mode_space):
        """Test that projection levels outside 0..n(d-1) are rejected."""
        with pytest.raises(ArgumentError):
            low_subspace_project(vacuum_vector(two_mode_space), two_mode_space.max_total + 1)

    def test_vector_is_immutable(self, two_mode_space):
        """Test that coefficient arrays are read-only."""
        v = vacuum_vector(two_mode_space)
        with pytest.raises(ValueError):
            v.coeffs[0] = 2.0


class TestExponentials:
    """Test op_exp and the terminating raising series."""

    def test_number_conserving_exp_is_unitary(self, two_mode_space):
        """Test that a phase rotation exp(-i theta a+a) is exactly unitary."""
        a, ad = make_ladder(two_mode_space, 1)
        u = op_exp(-0.7j * (ad @ a))
        assert op_norm(u.dagger() @ u - identity(two_mode_space)) < 1e-12

    def test_exp_of_zero_is_identity(self, two_mode_space):
        """Test exp(0) = I."""
        assert np.array_equal(op_exp(zero_operator(two_mode_space)).matrix, identity(two_mode_space).matrix)

    def test_quadrature_exp_is_unitary(self, single_mode_space):
        """Test exp(i theta X) at d = 16, a generator that changes photon number."""
        x, _ = quadratures(single_mode_space, 1)
        assert not conserves_number(x)
        u = op_exp(0.3j * x)
        residual = low_subspace_project(u.dagger() @ u - identity(single_mode_space), single_mode_space.cutoff - 3)
        assert op_norm(residual) <= 1e-10

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_exp_inverse(self, seed):
        """Test exp(A) exp(-A) = I for a random dense A with norm 5."""
        space = FockSpace(2, 4)
        rng = np.random.default_rng(seed)
        raw = rng.normal(size=(space.dimension,) * 2) + 1j * rng.normal(size=(space.dimension,) * 2)
        a = FockOperator(space, 5.0 * raw / np.linalg.norm(raw, 2))
        product = op_exp(a) @ op_exp(-1.0 * a)
        assert op_norm(product - identity(space)) <= 1e-9

    def test_non_finite_argument(self, two_mode_space):
        """Test that NaN entries raise a numeric error."""
        bad = np.zeros((two_mode_space.dimension,) * 2)
        bad[0, 0] = np.nan
        with pytest.raises(NumericError):
            op_exp(FockOperator(two_mode_space, bad))

    def test_coherent_series(self, single_mode_space):
        """Test exp(alpha a+)|0> has amplitudes alpha^k / sqrt(k!)."""
        _, ad = make_ladder(single_mode_space, 1)
        alpha = 0.6 - 0.2j
        v = exp_raising_on_vacuum(alpha * ad)
        for k in range(single_mode_space.cutoff):
            assert v.amplitude([k]) == pytest.approx(alpha ** k / math.sqrt(math.factorial(k)), abs=1e-14)

    def test_series_needs_raising_operator(self, single_mode_space):
        """Test that a lowering operator is rejected."""
        a, _ = make_ladder(single_mode_space, 1)
        with pytest.raises(ArgumentError):
            exp_raising_on_vacuum(a)


class TestExactFactors:
    """Test passive unitaries and padded single-mode factors."""

    def test_passive_operator_transforms_annihilators(self, two_mode_space):
        """Test Pi+ a_i Pi = sum_j W_ij a_j below the truncation edge."""
        c, s = math.cos(0.4), math.sin(0.4)
        w = np.array([[c, s], [s, -c]])
        pi = passive_operator(two_mode_space, w)
        level = two_mode_space.cutoff - 2
        for i in range(2):
            lhs = pi.dagger() @ make_ladder(two_mode_space, i + 1)[0] @ pi
            rhs = w[i, 0] * make_ladder(two_mode_space, 1)[0] + w[i, 1] * make_ladder(two_mode_space, 2)[0]
            assert op_norm(low_subspace_project(lhs - rhs, level)) < 1e-10

    def test_passive_operator_needs_unitary(self, two_mode_space):
        """Test that a non-unitary matrix is rejected."""
        with pytest.raises(ArgumentError):
            passive_operator(two_mode_space, np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_displacement_mean(self, single_mode_space):
        """Test <X> = sqrt2 Re(alpha) and <P> = sqrt2 Im(alpha) for D(alpha)|0>."""
        alpha = 0.3 + 0.2j
        v = apply(displacement_operator(single_mode_space, 1, alpha), vacuum_vector(single_mode_space))
        x, p = quadratures(single_mode_space, 1)
        assert inner(v, apply(x, v)).real == pytest.approx(math.sqrt(2.0) * 0.3, abs=1e-10)
        assert inner(v, apply(p, v)).real == pytest.approx(math.sqrt(2.0) * 0.2, abs=1e-10)

    def test_space_mismatch(self):
        """Test that operators on different spaces do not combine."""
        with pytest.raises(ArgumentError):
            identity(FockSpace(2, 4)) + identity(FockSpace(2, 5))
        with pytest.raises(ArgumentError):
            FockVector(FockSpace(1, 3), np.zeros(4))

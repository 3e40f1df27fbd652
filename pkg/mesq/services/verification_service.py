"""
MESQ - Verification Service

Runs the invariant suites (matrix identities, SU(1,1) closure, disentangling,
eigen-equations, entangling operator, squeezing, Hamiltonians, completeness)
and assembles a VerificationReport. Every check is a residual compared with
a tolerance; findings that are not failures go to the report notes.
"""

import logging
import time
from typing import Callable, Dict, List, Optional

import numpy as np

from mesq.config import config
from mesq.core.base import ArgumentError, EprVariant, LabelVariant, Realization
from mesq.models.report_models import CheckResult, Suite, VerificationReport
from mesq.services import algebra_service as algebra
from mesq.services import dynamics_service as dynamics
from mesq.services import state_service as states
from mesq.services.fock_engine import (
    FockSpace,
    apply,
    identity,
    linear_combination,
    low_subspace_project,
    op_exp,
    op_norm,
    quadratic_operator,
    vacuum_vector,
)
from mesq.services.gaussian_engine import (
    apply_map,
    fock_realization,
    moments_of_vector,
    omega,
    overlap,
    quad_variance,
    symplectic_of_generator,
    vacuum,
)

logger = logging.getLogger(__name__)

# Suite defaults when no cutoff is given
DEFAULT_CUTOFFS: Dict[Suite, Dict[int, int]] = {
    Suite.SU11: {2: 12, 3: 12},
    Suite.BCH: {2: 16, 3: 12},
    Suite.EIGEN: {2: 14, 3: 10},
    Suite.ENTANGLE: {2: 14},
    Suite.COMPLETENESS: {2: 8},
}
EIGEN_LABELS = 20
BCH_LAMBDA = 0.3
GOLDEN_R = 1.0
# literal S_n exponential: |lambda| at the Fock envelope edge
LITERAL_SN_LAMBDAS = np.array([0.5, -0.4, 0.3])
LITERAL_SN_CUTOFF = 16
TRANSPORT_CUTOFF = 30


def log_slope(xs, ys) -> float:
    """Slope of log(y) against x by least squares."""
    return float(np.polyfit(np.asarray(xs, dtype=float), np.log(np.asarray(ys, dtype=float)), 1)[0])


def epr_fidelity_formula(r: float) -> float:
    """Fidelity of the regularized two-mode state (label 0) with the network EPR state."""
    return 1.0 / (1.0 + 0.25 * np.cosh(2.0 * r) * np.exp(-2.0 * r))


class SuiteRun:
    """Checks and notes gathered by one verification run."""

    def __init__(self, tol: float, seed: int):
        self.tol = tol
        self.seed = seed
        self.checks: List[CheckResult] = []
        self.notes: List[str] = []

    def _check(self, name: str, value: float, provenance: str, tolerance: Optional[float] = None) -> None:
        tolerance = self.tol if tolerance is None else tolerance
        result = CheckResult.residual(name, value, tolerance, provenance)
        logger.debug(f"{name}: {result.value:.3e} (tol {tolerance:.1e}) {'ok' if result.passed else 'FAIL'}")
        self.checks.append(result)

    def _note(self, message: str) -> None:
        logger.info(message)
        self.notes.append(message)

    # ========================================================================
    # SUITES
    # ========================================================================

    def matrices(self, n: int, cutoff: Optional[int] = None) -> None:
        for m in range(2, n + 1):
            for key, value in algebra.matrix_identity_residuals(m).items():
                tolerance = 1e-12 if key in ("F_Finv_identity", "G_spectrum") else 1e-14
                self._check(f"matrices/n={m}/{key}", value, f"structure-matrix identity {key}", tolerance)

    def su11(self, n: int, cutoff: Optional[int]) -> None:
        config.check_fock_envelope(n, cutoff)
        space = FockSpace(n, cutoff)
        expected_vacuum = {Realization.G: n / 4.0, Realization.GP: 0.25, Realization.GPP: (n - 1) / 4.0}
        for realization in Realization:
            triple = algebra.su11_generators(space, realization)
            for key, value in algebra.closure_residuals(triple).items():
                self._check(f"su11/{realization.value}/{key}", value, f"su(1,1) closure, {realization.value} realization")
            vac = algebra.vacuum_k_zero(triple)
            self._check(
                f"su11/{realization.value}/K0_vacuum",
                abs(vac - expected_vacuum[realization]),
                f"Bargmann index of the {realization.value} realization",
            )

    def bch(self, n: int, cutoff: Optional[int]) -> None:
        config.check_fock_envelope(n, cutoff)
        space = FockSpace(n, cutoff)
        signs = {Realization.G: 1, Realization.GP: -1, Realization.GPP: 1}
        for realization, sign in signs.items():
            residual = algebra.disentangling_residual(space, realization, BCH_LAMBDA, sign)
            self._check(
                f"bch/{realization.value}",
                residual,
                f"disentangled squeeze, {realization.value} realization",
                1e-8,
            )
        printed = algebra.disentangling_residual(space, Realization.GPP, BCH_LAMBDA, 1, lowering_sign=1)
        normal = algebra.disentangling_residual(space, Realization.GPP, BCH_LAMBDA, 1, lowering_sign=-1)
        self._note(
            "relative one-side squeezer: factored form with lowering factor exp(+K- tanh lam) "
            f"leaves residual {printed:.3e}; exp(-K- tanh lam) leaves {normal:.3e}"
        )

    def eigen(self, n: int, cutoff: Optional[int]) -> None:
        config.check_fock_envelope(n, cutoff)
        space = FockSpace(n, cutoff)
        for variant in LabelVariant:
            labels = states.random_labels(n, EIGEN_LABELS, self.seed, variant)
            for k, label in enumerate(labels):
                v = states.ideal_entangled_vector(space, label)
                report = states.eigen_residual(v, label)
                self._check(f"eigen/{variant.value}/{k}", report.max_ratio, f"eigen-equations of the {variant.value} family")
            # a shifted eigenvalue must not pass
            wrong = states.StateLabel(variant, labels[0].scalar + 1.0, labels[0].rest)
            ratio = states.eigen_residual(states.ideal_entangled_vector(space, labels[0]), wrong).max_ratio
            self._check(f"eigen/{variant.value}/wrong_label", max(0.0, 0.5 - ratio), "sanity: shifted eigenvalue is detected")

    def entangle(self, n: int, cutoff: Optional[int]) -> None:
        """Runs at n = 2 for the Fock parts; Gaussian parts use the requested n."""
        fock_cutoff = cutoff or DEFAULT_CUTOFFS[Suite.ENTANGLE][2]
        config.check_fock_envelope(2, fock_cutoff)

        fact = states.entangling_factorization(states.StateLabel.p_chi(1.0, [0.5]), fock_cutoff)
        self._check("entangle/factorization_overlap", fact.overlap_defect, "entangling operator factorizes |p,chi>", 1e-8)
        self._check("entangle/factorization_phase", fact.scalar_error, "phase exp(-ip sum chi / n)", 1e-8)
        self._check("entangle/factorization_shape", fact.shape_residual, "transported ket parameters", 1e-10)

        space = FockSpace(2, fock_cutoff)
        u = states.entangling_fock_operator(space)
        self._check("entangle/unitarity", op_norm(u.dagger() @ u - identity(space)), "entangling operator is unitary")
        transport = states.entangling_fock_transport(states.StateLabel.p_chi(0.5, [-0.25]), TRANSPORT_CUTOFF)
        for key, value in transport.items():
            self._check(f"entangle/fock_transport/{key}", value, "literal truncated operator matches the Gaussian construction", 1e-3)

        expected = np.eye(2 * n)
        expected[1:n, 0] = -1.0
        expected[n, n + 1:] = 1.0
        self._check(
            "entangle/symplectic_action",
            float(np.max(np.abs(states.entangling_map(n).S - expected))),
            "X_k -> X_k - X_1, P_1 -> P_1 + sum P_k",
        )

        rng = np.random.default_rng(self.seed)
        for variant in LabelVariant:
            label = states.StateLabel.from_values(variant, rng.uniform(-1.0, 1.0, n))
            reg = states.regularized_entangled_state(n, label, GOLDEN_R)
            means = states.label_means(reg)
            errors = [abs(means[name] - value) for name, _, value in states.eigen_observables(label)]
            self._check(f"entangle/label_transport/{variant.value}", max(errors), "regularized state means equal the label")

        rs = np.linspace(0.0, 3.0, 13)
        for variant, names in ((LabelVariant.P_CHI, ("P", "Q2")), (LabelVariant.CHI_P, ("sumX", "P1-P2"))):
            series = {name: [] for name in names}
            for r in rs:
                var = states.label_variances(states.regularized_entangled_state(n, states.StateLabel.zero(n, variant), r))
                for name in names:
                    series[name].append(var[name])
            for name in names:
                slope = log_slope(rs, series[name])
                self._check(f"entangle/var_slope/{variant.value}/{name}", abs(slope + 2.0), "regularized variances ~ e^{-2r}", 0.01)

        widths = [states.overlap_width(2, r) for r in np.linspace(0.5, 2.5, 9)]
        self._check(
            "entangle/overlap_width_slope",
            abs(log_slope(np.linspace(0.5, 2.5, 9), widths) + 1.0),
            "orthogonality width ~ e^{-r}",
            0.05,
        )

        reg0 = states.regularized_entangled_state(2, states.StateLabel.zero(2), GOLDEN_R).gaussian
        epr = dynamics.generate_epr(2, GOLDEN_R, EprVariant.P_CHI_ZERO)
        fidelity = overlap(reg0, epr)
        self._check(
            "entangle/network_fidelity_golden",
            abs(fidelity - epr_fidelity_formula(GOLDEN_R)),
            "regularized state vs beam-splitter EPR state",
        )
        self._note(f"fidelity(regularized label 0, network EPR) at r={GOLDEN_R}: {fidelity!r}")

        tanh_ket = states.tanh_regularized_ket(states.StateLabel.zero(2), GOLDEN_R)
        network_ket = states.GaussianKet.from_state(epr)
        self._check(
            "entangle/tanh_form_vs_network",
            abs(1.0 - abs(states.ket_overlap(tanh_ket, network_ket)) ** 2),
            "tanh-scaled two-mode form equals the network EPR state",
        )

    def squeeze(self, n: int, cutoff: Optional[int] = None) -> None:
        lams = np.array([0.7, 0.4, 0.2])
        sn = dynamics.squeeze_Sn(dynamics.SqueezeParams(lams))
        golden = [("P", states.total_momentum_direction(3), lams[0])]
        golden += [(f"Q{k}", states.relative_coordinate_direction(3, k), lams[k - 1]) for k in (2, 3)]
        for name, c, lam in golden:
            image = dynamics.conjugate_observable(sn, c, picture="adjoint")
            self._check(f"squeeze/conjugation/{name}", float(np.max(np.abs(image - np.exp(-lam) * c))), "S P S^-1 = e^{-lam_1} P, S Q_i S^-1 = e^{-lam_i} Q_i", 1e-12)

        self._fock_conjugation(lams / 2.0, 10)

        uniform = dynamics.squeeze_Sn(dynamics.SqueezeParams.uniform(n, 0.5))
        for name, c, factor in (
            ("X", dynamics.collective_x_direction(n), np.exp(-0.5)),
            ("Y", dynamics.collective_y_direction(n), np.exp(0.5)),
        ):
            image = dynamics.conjugate_observable(uniform, c)
            self._check(f"squeeze/collective_{name}", float(np.max(np.abs(image - factor * c))), "collective quadratures scale by e^{-+lam}", 1e-12)

        for lam in (0.0, 0.25, 0.5, 1.0):
            stats = dynamics.squeezed_vacuum_stats(n, lam)
            self._check(f"squeeze/var_X/lam={lam}", abs(stats.var_x - np.exp(-2 * lam) / 4), "Var(X) = e^{-2 lam}/4", 1e-12)
            self._check(f"squeeze/var_Y/lam={lam}", abs(stats.var_y - np.exp(2 * lam) / 4), "Var(Y) = e^{2 lam}/4", 1e-12)
            self._check(f"squeeze/uncertainty/lam={lam}", abs(stats.uncertainty_product - 1.0 / 16.0), "Delta X Delta Y = 1/4", 1e-12)

        closed = dynamics.squeezed_vacuum_stats(2, 0.4, cutoff=20)
        self._check("squeeze/closed_form_norm", abs(closed.closed_form_norm - 1.0), "sech^{n/2} exp(K+ tanh lam)|vac> is normalized", 1e-6)
        self._check("squeeze/closed_form_vs_map", abs(1.0 - closed.closed_form_overlap), "closed form equals S'|vac>", 1e-6)

        literal_n = min(n, 3)
        edge = dynamics.SqueezeParams(LITERAL_SN_LAMBDAS[:literal_n])
        space = FockSpace(literal_n, LITERAL_SN_CUTOFF)
        exponent = dynamics.sn_exponent_fock(space, edge)
        self._check(
            "squeeze/exponent_anti_hermitian",
            dynamics.exponent_hermitian_residual(exponent) / max(1.0, op_norm(exponent)),
            "c-number makes the exponent anti-Hermitian",
            1e-12,
        )
        literal = dynamics.squeeze_Sn_fock(space, edge)
        self._check(
            f"squeeze/fock_unitarity/n={literal_n}",
            op_norm(low_subspace_project(literal.dagger() @ literal - identity(space), LITERAL_SN_CUTOFF - 6)),
            "S_n is unitary",
            1e-8,
        )

        params = dynamics.SqueezeParams(np.linspace(0.3, -0.2, n))
        back = dynamics.squeeze_Sn(params).then(dynamics.squeeze_Sn(params.negated()))
        self._check("squeeze/inverse", float(np.max(np.abs(back.S - np.eye(2 * n)))), "S(lam) S(-lam) = I")

        for realization, sign, params in (
            (Realization.G, 1, dynamics.SqueezeParams.uniform(n, BCH_LAMBDA)),
            (Realization.GP, -1, dynamics.SqueezeParams.collective_only(n, BCH_LAMBDA)),
            (Realization.GPP, 1, dynamics.SqueezeParams.relative_only(n, BCH_LAMBDA)),
        ):
            su11_map = algebra.su11_symplectic(n, realization, BCH_LAMBDA, sign)
            diff = float(np.max(np.abs(su11_map.S - dynamics.squeeze_Sn(params).S)))
            self._check(f"squeeze/su11_consistency/{realization.value}", diff, f"S_n special case equals the {realization.value} squeeze")

        fock_n = min(n, 3)
        fock_space = FockSpace(fock_n, 10 if fock_n == 3 else 16)
        for key, value in dynamics.commutativity_residuals(fock_n, fock_space).items():
            self._check(f"squeeze/commuting/{key}", value, "S_n generator pieces commute")

        self._epr_checks(n)

    def _fock_conjugation(self, lams: np.ndarray, cutoff: int) -> None:
        """S P = e^{-lam_1} P S and S Q_i = e^{-lam_i} Q_i S on the exact low block."""
        n = lams.size
        config.check_fock_envelope(n, cutoff)
        space = FockSpace(n, cutoff)
        s_op = fock_realization(space, dynamics.squeeze_Sn(dynamics.SqueezeParams(lams)))
        level = cutoff - 2
        directions = [("P", states.total_momentum_direction(n), lams[0])]
        directions += [(f"Q{k}", states.relative_coordinate_direction(n, k), lams[k - 1]) for k in range(2, n + 1)]
        for name, c, lam in directions:
            obs = linear_combination(space, c)
            diff = s_op @ obs - np.exp(-lam) * (obs @ s_op)
            self._check(f"squeeze/fock_conjugation/{name}", op_norm(low_subspace_project(diff, level)), "conjugation law in the Fock engine", 1e-6)

    def _epr_checks(self, n: int) -> None:
        rs = np.linspace(0.0, 3.0, 13)
        cases = (
            (EprVariant.P_CHI_ZERO, states.total_momentum_direction(n), "sumP"),
            (EprVariant.P_CHI_ZERO, states.relative_coordinate_direction(n, 2), "Q2"),
            (EprVariant.CHI_P_ZERO, states.total_coordinate_direction(n), "sumX"),
            (EprVariant.CHI_P_ZERO, states.relative_momentum_direction(n, 2), "P1-P2"),
        )
        for variant, c, name in cases:
            variances = [quad_variance(dynamics.generate_epr(n, r, variant), c) for r in rs]
            self._check(f"squeeze/epr_slope/{variant.value}/{name}", abs(log_slope(rs, variances) + 2.0), "network EPR variances ~ e^{-2r}", 0.01)

        epr = dynamics.generate_epr(n, GOLDEN_R, EprVariant.P_CHI_ZERO)
        self._check("squeeze/epr_mean", float(np.max(np.abs(epr.mean))), "network EPR state has zero mean")
        if n >= 3:
            perm = np.arange(2 * n)
            perm[[1, 2]] = perm[[2, 1]]
            perm[[n + 1, n + 2]] = perm[[n + 2, n + 1]]
            self._check("squeeze/epr_permutation", float(np.max(np.abs(epr.cov[np.ix_(perm, perm)] - epr.cov))), "modes 2..n enter symmetrically")

        squeezed = dynamics.squeezed_vacuum_state(n, GOLDEN_R)
        chi_p = dynamics.generate_epr(n, GOLDEN_R, EprVariant.CHI_P_ZERO)
        self._check("squeeze/uniform_vs_network", abs(1.0 - overlap(squeezed, chi_p)), "S'|vac> equals the zero-label CHI_P network state")

    def hamiltonian(self, n: int, cutoff: Optional[int] = None) -> None:
        for m in (2, 3, 4):
            for beta_chi in (0.5, 1.0):
                pump = dynamics.PumpSpec(beta_chi, 1.0)
                g = dynamics.pfister_hamiltonian(m, beta_chi)
                rates = dynamics.heisenberg_rates(g, pump)
                expected_sum = np.exp(-(m - 1) * beta_chi * pump.t)
                expected_rel = np.exp(-beta_chi * pump.t)
                for name, entry in rates.entries.items():
                    target = expected_sum if name == "sumP" else expected_rel
                    value = abs(entry.factor - target) if entry.is_eigen else float("inf")
                    self._check(f"hamiltonian/rate/n={m}/bx={beta_chi}/{name}", value, "asymmetric squeezing rates")
                    per_pump = -(m - 1) if name == "sumP" else -1
                    unit_rate = abs(entry.rate_per_beta_chi - per_pump) if entry.rate_per_beta_chi is not None else float("inf")
                    self._check(f"hamiltonian/rate_per_pump/n={m}/bx={beta_chi}/{name}", unit_rate, "rates in units of beta_chi")
                hi = dynamics.hamiltonian_HI(m, -(m - 1) * beta_chi, -beta_chi)
                self._check(f"hamiltonian/HI_equals_pairwise/n={m}/bx={beta_chi}", float(np.max(np.abs(hi.A - g.A))), "one-side Hamiltonian reduces to pairwise down-conversion", 1e-12)

        flow = np.sort(np.linalg.eigvals(omega(3) @ dynamics.pfister_hamiltonian(3, 1.0).A).real)
        self._check("hamiltonian/flow_spectrum", float(np.max(np.abs(flow - np.array([-2.0, -1.0, -1.0, 1.0, 1.0, 2.0])))), "collective and relative flow rates")

        space = FockSpace(2, 20)
        for k, g in enumerate(dynamics.cross_engine_generators(2, 5, self.seed)):
            fock_state = apply(op_exp(-1j * quadratic_operator(space, g.A, g.b)), vacuum_vector(space))
            mean_f, cov_f = moments_of_vector(fock_state)
            gauss = apply_map(vacuum(2), symplectic_of_generator(g))
            err = max(float(np.max(np.abs(mean_f - gauss.mean))), float(np.max(np.abs(cov_f - gauss.cov))))
            self._check(f"hamiltonian/cross_engine/{k}", err, "Fock and Gaussian engines agree", 1e-6)

    def completeness(self, n: int, cutoff: Optional[int] = None) -> None:
        """Two-mode quadrature; the Gaussian n does not enter."""
        cutoff = cutoff or DEFAULT_CUTOFFS[Suite.COMPLETENESS][2]
        reports = [states.completeness_quadrature_check(r, cutoff=cutoff) for r in (1.0, 1.5, 2.0)]
        deviations = [rep.deviation for rep in reports]
        self._check("completeness/deviation_r2", deviations[-1], "regularized states resolve the identity", 0.05)
        self._check("completeness/monotone_in_r", max(0.0, max(np.diff(deviations))), "deviation decreases with r")
        self._check(
            "completeness/integrand_rank_one",
            max(rep.rank_one_defect for rep in reports),
            "one grid point adds a pure-state projector to the accumulated block",
            1e-6,
        )
        self._check(
            "completeness/integrand_positive",
            max(max(0.0, -rep.min_point_eigenvalue) for rep in reports),
            "one grid point adds a positive semidefinite block",
            1e-6,
        )
        for rep in reports:
            self._note(
                f"completeness r={rep.r}: deviation {rep.deviation!r} on |00>..|11>, "
                f"{rep.cutoff_deviation!r} on the {rep.cutoff}^2 box"
            )
            for warning in rep.warnings:
                self._note(warning)


class VerificationService:
    """Runs verification suites with a fixed tolerance and seed."""

    def __init__(self, tol: Optional[float] = None, seed: Optional[int] = None):
        self.tol = config.DEFAULT_TOL if tol is None else float(tol)
        self.seed = config.DEFAULT_SEED if seed is None else int(seed)

    @staticmethod
    def cutoff_for(suite: Suite, n: int, cutoff: Optional[int]) -> Optional[int]:
        if cutoff is not None:
            return cutoff
        table = DEFAULT_CUTOFFS.get(suite)
        if table is None:
            return None
        return table.get(n, min(table.values()))

    def run(self, suite, n: int = 2, cutoff: Optional[int] = None) -> VerificationReport:
        """Run one suite (or all of them) and return the report."""
        suite = Suite(suite)
        if n < 2:
            raise ArgumentError(f"verification needs n >= 2 modes, got {n}")
        config.check_gaussian_envelope(n)
        suite_run = SuiteRun(self.tol, self.seed)
        start = time.perf_counter()
        logger.info(f"verify {suite.value}: n={n} cutoff={cutoff} tol={self.tol} seed={self.seed}")

        runners: Dict[Suite, Callable[[int, Optional[int]], None]] = {
            Suite.MATRICES: suite_run.matrices,
            Suite.SU11: suite_run.su11,
            Suite.BCH: suite_run.bch,
            Suite.EIGEN: suite_run.eigen,
            Suite.ENTANGLE: suite_run.entangle,
            Suite.SQUEEZE: suite_run.squeeze,
            Suite.HAMILTONIAN: suite_run.hamiltonian,
            Suite.COMPLETENESS: suite_run.completeness,
        }
        selected = list(runners) if suite is Suite.ALL else [suite]
        for item in selected:
            runners[item](n, self.cutoff_for(item, n, cutoff))

        elapsed = int(round(1000 * (time.perf_counter() - start)))
        report = VerificationReport(
            suite=suite,
            n=n,
            cutoff=cutoff if suite is Suite.ALL else self.cutoff_for(suite, n, cutoff),
            tol=self.tol,
            seed=self.seed,
            checks=suite_run.checks,
            notes=suite_run.notes,
            wall_time_ms=elapsed,
        )
        logger.info(f"verify {suite.value}: {len(report.checks)} checks, {len(report.failures)} failed")
        return report


# Global instance
_verification_service: Optional[VerificationService] = None


def get_verification_service() -> VerificationService:
    """Get or create the verification service instance."""
    global _verification_service
    if _verification_service is None:
        _verification_service = VerificationService()
    return _verification_service

import numpy as np
import pytest

from triopo import (
    IncompleteCovarianceError,
    ModeId,
    QuadratureAxis,
    QuadratureCombination,
    SpectralCovariance,
    beta_terms,
    bipartite_duan,
    combination_variance,
    optimal_alpha,
    tripartite_witnesses,
)

from conftest import REFERENCE_VALUES, random_physical_covariance

Q = QuadratureAxis.Q
P = QuadratureAxis.P


def q_plus():
    return QuadratureCombination.normalized_pair(Q, ModeId.SIGNAL, ModeId.IDLER, +1.0)


def corrected_variance(S, base, alpha, mode):
    combo = base.minus(alpha, QuadratureCombination.single(mode, Q))
    return combination_variance(S, combo)


class TestOptimalAlpha:
    def test_uncorrelated_gives_zero(self):
        S = SpectralCovariance.vacuum()
        assert optimal_alpha(S, q_plus(), ModeId.PUMP) == pytest.approx(0.0, abs=1e-15)

    def test_closed_form_matches_grid_search(self):
        # symmetric pump-twin phase correlations c with pump variance v
        v, c = 2.0, 0.6
        m = np.eye(6)
        m[1, 1] = v
        m[1, 3] = m[3, 1] = c
        m[1, 5] = m[5, 1] = c
        S = SpectralCovariance(m)
        a_star = optimal_alpha(S, q_plus(), ModeId.PUMP)
        assert a_star == pytest.approx(np.sqrt(2) * c / v, rel=1e-12)
        alphas = np.linspace(a_star - 1, a_star + 1, 4001)
        vals = [corrected_variance(S, q_plus(), a, ModeId.PUMP) for a in alphas]
        assert alphas[int(np.argmin(vals))] == pytest.approx(a_star, abs=1e-3)

    def test_reference_fixture_reduction(self, measured_covariance):
        S = measured_covariance
        a_star = optimal_alpha(S, q_plus(), ModeId.PUMP)
        v_plain = combination_variance(S, q_plus())
        v_corr = corrected_variance(S, q_plus(), a_star, ModeId.PUMP)
        assert v_plain == pytest.approx(1.28, abs=1e-9)
        assert v_corr == pytest.approx(0.84, abs=1e-9)
        assert v_plain - v_corr == pytest.approx(0.44, abs=1e-9)   # beta0

    def test_zero_variance_correction_rejected(self):
        m = np.eye(6)
        m[1, 1] = 0.0   # degenerate pump phase (test-only, admitted as >= 0)
        S = SpectralCovariance(m)
        with pytest.raises(ValueError, match="zero variance"):
            optimal_alpha(S, q_plus(), ModeId.PUMP)


class TestBetaTerms:
    def test_all_zero_without_phase_correlations(self):
        assert beta_terms(SpectralCovariance.vacuum()) == pytest.approx((0, 0, 0))

    def test_direct_substitution(self):
        # C_q0q1 = C_q0q2 = 0.5 and pump phase variance 2
        m = np.eye(6)
        m[1, 1] = 2.0
        m[1, 3] = m[3, 1] = 0.5
        m[1, 5] = m[5, 1] = 0.5
        S = SpectralCovariance(m)
        b0, b1, b2 = beta_terms(S)
        assert b0 == pytest.approx(1.0 / 4.0, rel=1e-12)
        # cross-check against the reduction achieved by the optimal alpha
        a_star = optimal_alpha(S, q_plus(), ModeId.PUMP)
        red = combination_variance(S, q_plus()) - corrected_variance(
            S, q_plus(), a_star, ModeId.PUMP)
        assert b0 == pytest.approx(red, rel=1e-12)
        # beta1 = (C_q0q1 - C_q2q1)^2 / (2 var_q1) = (0.5 - 0)^2 / 2
        assert b1 == pytest.approx(0.125, rel=1e-12)
        assert b2 == pytest.approx(0.125, rel=1e-12)

    def test_reference_fixture_beta0(self, measured_covariance):
        b0, _, _ = beta_terms(measured_covariance)
        assert b0 == pytest.approx(0.44, abs=1e-9)

    def test_nonnegative_on_random_states(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            S = SpectralCovariance(random_physical_covariance(rng))
            assert min(beta_terms(S)) >= 0.0


class TestTripartiteWitnesses:
    def test_vacuum_saturates_all_inequalities(self):
        rep = tripartite_witnesses(SpectralCovariance.vacuum())
        assert (rep.v0, rep.v1, rep.v2) == pytest.approx((2.0, 2.0, 2.0), abs=1e-12)
        assert rep.violations == (False, False, False)
        assert not rep.genuine_tripartite

    def test_reference_fixture_values(self, measured_covariance):
        rep = tripartite_witnesses(measured_covariance)
        assert rep.v0 == pytest.approx(REFERENCE_VALUES["V0"], abs=1e-9)
        assert rep.v1 == pytest.approx(REFERENCE_VALUES["V1"], abs=1e-9)
        assert rep.v2 == pytest.approx(REFERENCE_VALUES["V2"], abs=1e-9)
        assert rep.violations == (True, False, False)
        assert not rep.genuine_tripartite
        assert rep.terms["var_q_plus_corr"] == pytest.approx(0.84, abs=1e-9)
        assert rep.terms["var_q01_corr"] == pytest.approx(1.01, abs=1e-9)
        assert rep.terms["var_q02_corr"] == pytest.approx(0.97, abs=1e-9)
        # corrected twin phase sum below SQL with beta0 > 0
        assert rep.triple_phase_correlation

    def test_corrected_identities_hold_exactly(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            S = SpectralCovariance(random_physical_covariance(rng))
            rep = tripartite_witnesses(S)
            t = rep.terms
            assert t["var_q_plus_corr"] == pytest.approx(
                t["var_q_plus"] - t["beta0"], abs=1e-12)
            assert t["var_q01_corr"] == pytest.approx(
                t["var_q01"] - t["beta2"], abs=1e-12)
            assert t["var_q02_corr"] == pytest.approx(
                t["var_q02"] - t["beta1"], abs=1e-12)

    def test_optimal_alpha_beats_random_alphas(self):
        rng = np.random.default_rng(23)
        S = SpectralCovariance(random_physical_covariance(rng))
        rep = tripartite_witnesses(S)
        base = q_plus()
        for alpha in rng.uniform(-3, 3, size=1000):
            v = rep.terms["var_p_minus"] + corrected_variance(S, base, alpha, ModeId.PUMP)
            assert rep.v0 <= v + 1e-12

    def test_monotone_improvement_over_uncorrected(self):
        rng = np.random.default_rng(24)
        for _ in range(30):
            S = SpectralCovariance(random_physical_covariance(rng))
            rep = tripartite_witnesses(S)
            t = rep.terms
            assert t["var_q_plus_corr"] <= t["var_q_plus"] + 1e-12
            assert t["var_q01_corr"] <= t["var_q01"] + 1e-12
            assert t["var_q02_corr"] <= t["var_q02"] + 1e-12

    def test_twin_swap_symmetry(self):
        rng = np.random.default_rng(25)
        perm = [0, 1, 4, 5, 2, 3]   # swap signal and idler
        for _ in range(20):
            m = random_physical_covariance(rng)
            swapped = m[np.ix_(perm, perm)]
            rep = tripartite_witnesses(SpectralCovariance(m))
            rep_swapped = tripartite_witnesses(SpectralCovariance(swapped))
            assert rep_swapped.v0 == pytest.approx(rep.v0, rel=1e-12)
            assert rep_swapped.v1 == pytest.approx(rep.v2, rel=1e-12)
            assert rep_swapped.v2 == pytest.approx(rep.v1, rel=1e-12)

    def test_separable_products_never_violate(self):
        rng = np.random.default_rng(26)
        for _ in range(50):
            m = np.eye(6)
            for b in range(3):
                r = rng.uniform(0.3, 3.0)
                extra = rng.uniform(0.0, 1.0)
                m[2 * b, 2 * b] = r + extra
                m[2 * b + 1, 2 * b + 1] = 1.0 / r + extra
            rep = tripartite_witnesses(SpectralCovariance(m))
            assert min(rep.v0, rep.v1, rep.v2) >= 2.0 - 1e-9

    def test_scale_covariance_of_minimizer(self):
        rng = np.random.default_rng(27)
        m = random_physical_covariance(rng)
        lam = 1.7
        scaled = m.copy()
        scaled[1, :] *= lam
        scaled[:, 1] *= lam
        rep = tripartite_witnesses(SpectralCovariance(m))
        rep_scaled = tripartite_witnesses(SpectralCovariance(scaled))
        assert rep_scaled.coefficients.alpha0 == pytest.approx(
            rep.coefficients.alpha0 / lam, rel=1e-12)
        assert rep_scaled.v0 == pytest.approx(rep.v0, rel=1e-12)

    def test_missing_entry_raises_with_name(self, measured_terms):
        from triopo import reconstruct_from_measurements
        terms = dict(measured_terms)
        del terms["C_q0q1"]
        S = reconstruct_from_measurements(terms)
        with pytest.raises(IncompleteCovarianceError, match="q"):
            tripartite_witnesses(S)


class TestBipartiteDuan:
    def test_reference_fixture_twin_pair(self, measured_covariance):
        value, entangled = bipartite_duan(measured_covariance)
        assert value == pytest.approx(REFERENCE_VALUES["duan_12"], abs=1e-9)
        assert entangled

    def test_vacuum_not_entangled(self):
        value, entangled = bipartite_duan(SpectralCovariance.vacuum())
        assert value == pytest.approx(2.0, abs=1e-12)
        assert not entangled

    def test_two_mode_squeezed_closed_form(self):
        for r in (0.2, 0.7, 1.5):
            ch, sh = np.cosh(2 * r), np.sinh(2 * r)
            m = np.eye(6)
            m[2, 2] = m[3, 3] = m[4, 4] = m[5, 5] = ch
            m[2, 4] = m[4, 2] = +sh    # amplitude correlation
            m[3, 5] = m[5, 3] = -sh    # phase anticorrelation
            S = SpectralCovariance(m)
            value, entangled = bipartite_duan(S)
            assert value == pytest.approx(2 * np.exp(-2 * r), rel=1e-12)
            assert entangled

    def test_pump_twin_pair_uses_sum_difference_structure(self, measured_covariance):
        value, _ = bipartite_duan(measured_covariance, (ModeId.PUMP, ModeId.SIGNAL))
        t = tripartite_witnesses(measured_covariance).terms
        assert value == pytest.approx(t["var_p01"] + t["var_q01"], abs=1e-12)

    def test_identical_modes_rejected(self, measured_covariance):
        with pytest.raises(ValueError):
            bipartite_duan(measured_covariance, (ModeId.SIGNAL, ModeId.SIGNAL))


class TestSerialization:
    def test_key_value_block(self, measured_covariance):
        rep = tripartite_witnesses(measured_covariance)
        block = rep.to_key_value_block()
        parsed = dict(line.split("=", 1) for line in block.strip().splitlines())
        assert float(parsed["V0"]) == pytest.approx(1.29, abs=1e-9)
        assert parsed["genuine_tripartite"] == "False"
        assert parsed["violation0"] == "True"
        assert block.endswith("\n")

    def test_csv_row_matches_header(self, measured_covariance):
        rep = tripartite_witnesses(measured_covariance)
        header = rep.csv_header(with_sigma=True)
        row = rep.to_csv_row(sigma=1.14)
        assert len(header) == len(row)
        assert row[0] == 1.14
        assert row[header.index("V0")] == pytest.approx(1.29, abs=1e-9)

import numpy as np
import pytest

from triopo import (
    AnalysisCavity,
    DetectionParams,
    ModeId,
    OpoParams,
    QuadratureAxis,
    QuadratureCombination,
    SpectralCovariance,
    apply_efficiency,
    combination_variance,
    default_cavities,
    output_spectra,
    reflect_covariance,
    reflection_coefficient,
    rotation_coefficients,
    synchronous_scan,
    validate_physicality,
)

from conftest import random_physical_covariance

OMEGA = 21e6


def cav(bandwidth=14e6, g=1.0, detuning=0.0):
    return AnalysisCavity(bandwidth, g, detuning)


def conversion(detuning, ratio, g=1.0):
    """|a_pq|^2 at detuning for a cavity with bandwidth OMEGA/ratio."""
    c = cav(bandwidth=OMEGA / ratio, g=g, detuning=detuning)
    rc = rotation_coefficients(c, OMEGA)
    return abs(rc.a_pq) ** 2


def best_conversion(center, ratio, half_width, g=1.0):
    ds = np.linspace(center - half_width, center + half_width, 801)
    return max(conversion(d, ratio, g) for d in ds)


class TestReflectionCoefficient:
    def test_lossless_on_resonance_pi_flip(self):
        assert reflection_coefficient(cav(g=1.0)) == pytest.approx(-1.0)

    def test_impedance_matched_dark_reflection(self):
        assert reflection_coefficient(cav(g=0.5)) == pytest.approx(0.0, abs=1e-15)

    def test_half_linewidth_gives_quarter_wave(self):
        r = reflection_coefficient(cav(g=1.0, detuning=0.5))
        assert r == pytest.approx(1j, abs=1e-15)
        assert abs(r) == pytest.approx(1.0, rel=1e-15)
        assert np.angle(r) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_far_detuned_mirror(self):
        r = reflection_coefficient(cav(g=0.8, detuning=500.0))
        assert r == pytest.approx(1.0, abs=1e-2)

    def test_unit_modulus_iff_lossless(self):
        for x in (-2.0, -0.3, 0.0, 0.7, 4.0):
            assert abs(reflection_coefficient(cav(g=1.0, detuning=x))) == pytest.approx(1.0)
            assert abs(reflection_coefficient(cav(g=0.9, detuning=x))) < 1.0


class TestRotationCoefficients:
    def test_far_detuned_reads_amplitude(self):
        rc = rotation_coefficients(cav(g=1.0, detuning=300.0), OMEGA)
        assert abs(rc.a_pp) == pytest.approx(1.0, abs=1e-3)
        assert abs(rc.a_pq) == pytest.approx(0.0, abs=1e-2)

    def test_on_resonance_reads_amplitude(self):
        rc = rotation_coefficients(cav(g=1.0, detuning=0.0), OMEGA)
        assert abs(rc.a_pp) == pytest.approx(1.0, rel=1e-12)
        assert abs(rc.a_pq) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("ratio", [np.sqrt(2), 1.5, 21 / 11.5])
    def test_complete_conversion_near_half_linewidth(self, ratio):
        assert best_conversion(0.5, ratio, 0.4) > 0.98

    @pytest.mark.parametrize("ratio", [np.sqrt(2), 1.5, 21 / 11.5])
    def test_complete_conversion_near_sideband_resonance(self, ratio):
        assert best_conversion(ratio, ratio, 0.6) > 0.98

    def test_no_complete_conversion_well_below_sqrt2(self):
        ds = np.linspace(0.05, 3.0, 1200)
        assert max(conversion(d, 1.2) for d in ds) < 0.98

    def test_power_weights_bounded_and_saturated_when_lossless(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            g = rng.uniform(0.5, 1.0)
            d = rng.uniform(-4, 4)
            ratio = rng.uniform(0.5, 3.0)
            rc = rotation_coefficients(cav(OMEGA / ratio, g, d), OMEGA)
            total = abs(rc.a_pp) ** 2 + abs(rc.a_pq) ** 2
            assert total <= 1.0 + 1e-9
            if g == 1.0:
                assert total == pytest.approx(1.0, abs=1e-9)
        rc = rotation_coefficients(cav(OMEGA / 1.5, 1.0, 0.8), OMEGA)
        assert abs(rc.a_pp) ** 2 + abs(rc.a_pq) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_opposite_detuning_conjugate_pattern(self):
        for d in (0.3, 0.5, 1.7):
            plus = rotation_coefficients(cav(g=0.95, detuning=+d), OMEGA)
            minus = rotation_coefficients(cav(g=0.95, detuning=-d), OMEGA)
            assert minus.a_pp == pytest.approx(plus.a_pp, rel=1e-12)
            assert minus.a_pq == pytest.approx(-plus.a_pq, rel=1e-12)


class TestReflectCovariance:
    def test_vacuum_fixed_point(self):
        S = SpectralCovariance.vacuum(OMEGA)
        rng = np.random.default_rng(42)
        for _ in range(40):
            cavs = tuple(cav(rng.uniform(8e6, 20e6), rng.uniform(0.5, 1.0),
                             rng.uniform(-5, 5)) for _ in range(3))
            out = reflect_covariance(S, cavs, OMEGA)
            np.testing.assert_allclose(out.entries, np.eye(6), rtol=0, atol=1e-9)

    def test_physicality_preserved(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            S = SpectralCovariance(random_physical_covariance(rng), OMEGA)
            cavs = tuple(cav(rng.uniform(8e6, 20e6), rng.uniform(0.6, 1.0),
                             rng.uniform(-4, 4)) for _ in range(3))
            out = reflect_covariance(S, cavs, OMEGA)
            ok, worst = validate_physicality(out, tol=1e-8)
            assert ok, worst

    def test_single_beam_block_congruence(self):
        # lossless single cavity: output p variance must match the direct
        # 2x2 congruence with the complex rotation coefficients
        rng = np.random.default_rng(44)
        S = SpectralCovariance(random_physical_covariance(rng), OMEGA)
        c1 = cav(12e6, 1.0, 0.6)
        far = cav(12e6, 1.0, 1e6)   # effectively identity for the other beams
        out = reflect_covariance(S, (c1, far, far), OMEGA)
        rc = rotation_coefficients(c1, OMEGA)
        pin = S.entries[0, 0]
        qin = S.entries[1, 1]
        cross = S.entries[0, 1]
        expect = (abs(rc.a_pp) ** 2 * pin + abs(rc.a_pq) ** 2 * qin
                  + 2 * np.real(rc.a_pp * np.conj(rc.a_pq)) * cross)
        assert out.entries[0, 0] == pytest.approx(expect, rel=1e-9)

    def test_zero_detuning_preserves_amplitude_rows(self):
        S = SpectralCovariance(random_physical_covariance(np.random.default_rng(45)),
                               OMEGA)
        cavs = default_cavities(detuning=0.0, coupling_ratio=1.0)
        out = reflect_covariance(S, cavs, OMEGA)
        for b, c1 in enumerate(cavs):
            w = abs(rotation_coefficients(c1, OMEGA).a_pp) ** 2
            i = 2 * b
            assert out.entries[i, i] == pytest.approx(
                w * S.entries[i, i] + (1 - w), rel=1e-9)

    def test_variances_even_in_detuning_for_decoupled_input(self):
        S = output_spectra(OpoParams(sigma=1.2), OMEGA)
        for d in (0.4, 1.1, 2.5):
            a = reflect_covariance(S, default_cavities(+d), OMEGA)
            b = reflect_covariance(S, default_cavities(-d), OMEGA)
            np.testing.assert_allclose(np.diag(a.entries)[::2],
                                       np.diag(b.entries)[::2], rtol=1e-10)

    def test_phase_point_reads_twin_phase_sum(self):
        # at half-linewidth detuning the reflected amplitude sum tracks the
        # incident twin phase sum (up to conversion incompleteness and loss)
        S = output_spectra(OpoParams(sigma=1.14), OMEGA)
        det = DetectionParams()
        reflected = apply_efficiency(
            reflect_covariance(S, synchronous_scan(default_cavities(), 0.5), OMEGA), det)
        incident = apply_efficiency(S, det)
        q_plus = QuadratureCombination.normalized_pair(
            QuadratureAxis.Q, ModeId.SIGNAL, ModeId.IDLER, +1.0)
        p_sum = QuadratureCombination.normalized_pair(
            QuadratureAxis.P, ModeId.SIGNAL, ModeId.IDLER, +1.0)
        measured = combination_variance(reflected, p_sum)
        target = combination_variance(incident, q_plus)
        assert measured == pytest.approx(target, abs=0.15)

    def test_rejects_unphysical_input(self):
        bad = SpectralCovariance(0.5 * np.eye(6), OMEGA)
        with pytest.raises(Exception, match="uncertainty"):
            reflect_covariance(bad, default_cavities(0.5), OMEGA)

    def test_needs_three_cavities(self):
        S = SpectralCovariance.vacuum(OMEGA)
        with pytest.raises(ValueError):
            reflect_covariance(S, (cav(), cav()), OMEGA)

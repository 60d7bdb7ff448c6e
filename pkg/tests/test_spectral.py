"""Time-resolved detection engine vs brute-force quadrature oracles.

The closed-form matrix elements carry a complex-argument erfc; every one
of them is checked against direct numeric integration of the defining
response-weighted overlap. The time-averaged identities are checked
against pdf-weighted time integrals.
"""

import math

import numpy as np
import pytest

from qghz.loss_analytics import w_metrics_threshold
from qghz.model import DetectorModel, EmitterArrayConfig
from qghz.numerics import QuadratureSpec, integrate_1d
from qghz.spectral import (
    avg_fidelity_corrected,
    avg_fidelity_uncorrected,
    b_matrix,
    detection_pdf,
    heralded_dm,
    phase_correct,
    threshold_time_resolved,
    tilted_profile,
    zeta,
)

_DET = DetectorModel(time_resolved=True, jitter=0.0)


def _b_quadrature(config, sigma, t0):
    """Direct integration of the Gaussian-weighted mode overlap."""
    d = config.d
    G, W = config.linewidths, config.frequencies
    B = np.empty((d, d), dtype=complex)
    norm = 1.0 / (math.sqrt(2 * math.pi) * sigma)
    for j in range(d):
        for k in range(d):
            f = lambda t: (
                norm
                * math.exp(-((t - t0) ** 2) / (2 * sigma**2))
                * zeta(t, G[j], W[j])
                * np.conj(zeta(t, G[k], W[k]))
            )
            lo = t0 - 12 * sigma
            hi = t0 + 12 * sigma
            B[j, k] = integrate_1d(f, lo, hi, breakpoints=(0.0,))
    return B


class TestBMatrixClosedForm:
    def test_twenty_random_draws(self):
        """Closed form matches quadrature to 1e-8 max-norm, mixed params."""
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(20):
            d = int(rng.integers(2, 5))
            config = EmitterArrayConfig(
                d=d,
                p=0.1,
                linewidths=tuple(rng.uniform(0.5, 2.0, d)),
                frequencies=tuple(rng.uniform(-10.0, 10.0, d)),
            )
            sigma = float(rng.uniform(0.02, 0.6))
            t0 = float(rng.uniform(0.05, 2.0))
            B = b_matrix(config, sigma, t0)
            B_ref = _b_quadrature(config, sigma, t0)
            worst = max(worst, float(np.max(np.abs(B - B_ref))))
        assert worst < 1e-8, f"max-norm deviation {worst:.3e}"

    def test_sigma_zero_limit(self):
        config = EmitterArrayConfig(
            d=2, p=0.1, linewidths=(1.0, 1.5), frequencies=(0.0, 3.0)
        )
        t0 = 0.7
        B = b_matrix(config, 0.0, t0)
        for j in range(2):
            for k in range(2):
                zj = zeta(t0, config.linewidths[j], config.frequencies[j])
                zk = zeta(t0, config.linewidths[k], config.frequencies[k])
                assert B[j, k] == pytest.approx(zj * np.conj(zk), rel=1e-12)


class TestHeraldedDm:
    def test_identical_emitters_give_w(self):
        config = EmitterArrayConfig.uniform(4, 0.1, linewidth=1.0)
        for t0 in (0.1, 0.5, 2.0):
            rho = heralded_dm(config, _DET, t0)
            assert rho.fidelity_to_w() == pytest.approx(1.0, abs=1e-12)

    def test_outside_wavepacket_raises(self):
        config = EmitterArrayConfig.uniform(2, 0.1, linewidth=1.0)
        with pytest.raises(ValueError, match="wavepacket"):
            heralded_dm(config, _DET, 1e4)

    def test_requires_time_resolved(self):
        config = EmitterArrayConfig.uniform(2, 0.1)
        with pytest.raises(ValueError, match="time-resolved"):
            heralded_dm(config, DetectorModel(), 0.5)

    def test_dm_invariants_random_params(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            d = int(rng.integers(2, 6))
            config = EmitterArrayConfig(
                d=d,
                p=0.1,
                linewidths=tuple(rng.uniform(0.5, 2.0, d)),
                frequencies=tuple(rng.uniform(-5.0, 5.0, d)),
            )
            det = DetectorModel(time_resolved=True,
                                jitter=float(rng.uniform(0.0, 0.3)))
            rho = heralded_dm(config, det, float(rng.uniform(0.1, 1.5)))
            # Construction already asserts Hermiticity/trace/PSD.
            assert rho.d == d


class TestPhaseCorrect:
    def test_zero_detuning_is_identity(self):
        config = EmitterArrayConfig.uniform(3, 0.1, linewidth=1.0)
        rho = heralded_dm(config, _DET, 0.4)
        out = phase_correct(rho, 0.4, config)
        assert np.allclose(out.matrix, rho.matrix)

    def test_eigenvalues_invariant(self):
        config = EmitterArrayConfig(
            d=3, p=0.1, linewidths=(1.0, 1.2, 0.8),
            frequencies=(0.0, 4.0, -4.0),
        )
        det = DetectorModel(time_resolved=True, jitter=0.2)
        rho = heralded_dm(config, det, 0.6)
        out = phase_correct(rho, 0.6, config)
        ev_in = np.sort(np.linalg.eigvalsh(rho.matrix))
        ev_out = np.sort(np.linalg.eigvalsh(out.matrix))
        assert np.allclose(ev_in, ev_out, atol=1e-12)

    def test_exact_time_equal_linewidths_recovers_unity(self):
        config = EmitterArrayConfig(
            d=3, p=0.1, linewidths=(1.0,) * 3, frequencies=(0.0, 6.0, -6.0)
        )
        rho = heralded_dm(config, _DET, 0.9)
        assert rho.fidelity_to_w() < 0.99  # phases have scrambled it
        out = phase_correct(rho, 0.9, config)
        assert out.fidelity_to_w() == pytest.approx(1.0, abs=1e-12)


class TestTimeAverages:
    CONFIG = EmitterArrayConfig(
        d=3, p=0.1, linewidths=(1.0,) * 3, frequencies=(0.0, 2.0, -2.0)
    )

    def _avg_quadrature(self, config, sigma, corrected):
        """pdf-weighted time average of the instantaneous fidelity."""
        d = config.d
        D = config.detunings()
        spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10)

        def numerator(t0):
            B = b_matrix(config, sigma, t0)
            phases = np.exp(1j * D * t0) if corrected else 1.0
            return np.sum(B * phases) / d

        def denominator(t0):
            return np.real(np.trace(b_matrix(config, sigma, t0)))

        lo = -12 * sigma if sigma > 0 else 0.0
        hi = 60.0 / min(config.linewidths)
        num = integrate_1d(numerator, lo, hi, spec, breakpoints=(0.0,))
        den = integrate_1d(denominator, lo, hi, spec, breakpoints=(0.0,))
        return (num / den).real

    def test_corrected_matches_quadrature(self):
        for sigma in (0.05, 0.3):
            ref = self._avg_quadrature(self.CONFIG, sigma, corrected=True)
            assert avg_fidelity_corrected(self.CONFIG, sigma) == pytest.approx(
                ref, abs=1e-6
            )

    def test_corrected_pair_enumeration(self):
        # d=3, omega0 +/- Delta, equal Gamma:
        # (3 + 4 e^{-s^2 D^2/2} + 2 e^{-2 s^2 D^2}) / 9.
        delta, sigma = 2.0, 0.3
        x = math.exp(-0.5 * sigma**2 * delta**2)
        expected = (3 + 4 * x + 2 * x**4) / 9
        assert avg_fidelity_corrected(self.CONFIG, sigma) == pytest.approx(
            expected, rel=1e-12
        )

    def test_uncorrected_matches_quadrature_for_three_sigmas(self):
        ana = avg_fidelity_uncorrected(self.CONFIG)
        for sigma in (0.05, 0.2, 0.5):
            ref = self._avg_quadrature(self.CONFIG, sigma, corrected=False)
            assert ana == pytest.approx(ref, abs=1e-6)

    def test_uncorrected_hand_value(self):
        # d=2, Delta = 2 Gamma: (1/4)(2 + 2*Re[2G/(2iG+2G)]) = 3/4.
        config = EmitterArrayConfig(
            d=2, p=0.1, linewidths=(1.0, 1.0), frequencies=(0.0, 2.0)
        )
        assert avg_fidelity_uncorrected(config) == pytest.approx(0.75, abs=1e-14)

    def test_time_shifted_emitter_tilts_diagonal(self):
        """zeta_j(t - dt) tilts populations and adds a carrier phase.

        Checked against the numeric overlap integrals at sigma = 0: the
        shifted emitter's diagonal weight gains e^{+2 Gamma dt} (it starts
        decaying later) and the off-diagonal phase rotates by omega dt.
        """
        G, w_c, dt, t0 = 1.0, 3.0, 0.2, 1.0
        z0 = zeta(t0, G, w_c)
        z_shift = zeta(t0, G, w_c, t_shift=dt)
        assert abs(z_shift) ** 2 == pytest.approx(
            abs(z0) ** 2 * math.exp(2 * G * dt), rel=1e-12
        )
        rel_phase = np.angle(z_shift * np.conj(z0))
        assert rel_phase == pytest.approx(w_c * dt, abs=1e-12)


class TestTiltedProfile:
    TIMES = np.linspace(0.01, 5.0, 120)

    def test_equal_linewidths_flat_unity(self):
        config = EmitterArrayConfig.uniform(3, 0.1, linewidth=1.0)
        prof = tilted_profile(config, _DET, self.TIMES)
        assert np.allclose(prof.fidelity, 1.0, atol=1e-12)

    def test_d2_critical_time(self):
        g1, g2 = 1.4, 0.7
        config = EmitterArrayConfig(
            d=2, p=0.1, linewidths=(g1, g2), frequencies=(0.0, 0.0)
        )
        # |zeta_j(t)| = sqrt(2 g_j) e^{-g_j t} equalize at
        # t_c = ln(g1/g2) / (2 (g1 - g2)).
        t_c = math.log(g1 / g2) / (2.0 * (g1 - g2))
        rho = heralded_dm(config, _DET, t_c)
        assert rho.fidelity_to_w() == pytest.approx(1.0, abs=1e-12)

    def test_mismatched_linewidth_benchmark(self):
        """[0.6..1.4] Gamma_0: peak ~ 0.999 near t = 0.5, average ~ 0.98."""
        config = EmitterArrayConfig(
            d=5,
            p=0.1,
            linewidths=(0.6, 0.8, 1.0, 1.2, 1.4),
            frequencies=(0.0,) * 5,
        )
        times = np.linspace(0.01, 6.0, 400)
        prof = tilted_profile(config, _DET, times)
        assert prof.peak_fidelity >= 0.998
        assert abs(prof.peak_time - 0.5) < 0.2
        assert prof.avg_fidelity == pytest.approx(0.98, abs=0.005)

    def test_pdf_normalizes_to_click_probability(self):
        config = EmitterArrayConfig.uniform(3, 0.2, linewidth=1.0)
        total = integrate_1d(
            lambda t: detection_pdf(config, _DET, t), 0.0, math.inf
        )
        p = config.p
        assert total.real == pytest.approx(3 * p * (1 - p) ** 2, rel=1e-8)


class TestThresholdTimeResolved:
    def _config(self, d=3, p=0.3, split=10.0):
        freqs = sorted(split * ((j + 1) // 2) * (-1 if j % 2 else 1)
                       for j in range(d))
        return EmitterArrayConfig(
            d=d, p=p, linewidths=(1.0,) * d, frequencies=tuple(freqs)
        )

    def test_small_p_limit(self):
        config = self._config(p=1e-4, split=0.0)
        F, pdf = threshold_time_resolved(config, 0.5)
        assert F == pytest.approx(1.0, abs=1e-3)
        # Single-photon density ~ d p e^{-2 Gamma t} per unit time.
        F2, pdf2 = threshold_time_resolved(config, 1.5)
        assert pdf2 / pdf == pytest.approx(math.exp(-2.0), rel=1e-2)

    def test_indistinguishable_time_average_matches_closed_form(self):
        """Integrated over all detection times, the indistinguishable
        threshold fidelity must reproduce w_metrics_threshold to 1e-4."""
        config = self._config(split=0.0)
        spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-9)

        def weighted_f(t):
            F, pdf = threshold_time_resolved(config, t)
            return F * pdf

        def pdf_only(t):
            return threshold_time_resolved(config, t)[1]

        num = integrate_1d(weighted_f, 1e-9, 40.0, spec).real
        den = integrate_1d(pdf_only, 1e-9, 40.0, spec).real
        F_ref, P_ref = w_metrics_threshold(config.d, config.p, 1.0)
        assert num / den == pytest.approx(F_ref, abs=1e-4)
        assert den == pytest.approx(P_ref, abs=1e-4)

    def test_distinguishable_beats_indistinguishable_at_late_times(self):
        """Sampled at the beat-note maxima t = 2 pi k / Delta, where the
        carriers rephase; between maxima the fidelity oscillates."""
        config = self._config(split=10.0)
        F_flat, _ = w_metrics_threshold(config.d, config.p, 1.0)
        period = 2.0 * math.pi / 10.0
        late = [
            threshold_time_resolved(config, k * period)[0] for k in (2, 3, 4, 5)
        ]
        assert all(F > F_flat for F in late)

    def test_dimension_guard(self):
        config = EmitterArrayConfig.uniform(6, 0.1, linewidth=1.0)
        with pytest.raises(ValueError, match="d <= 5"):
            threshold_time_resolved(config, 1.0)

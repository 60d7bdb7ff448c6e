"""Domain-type and configuration-loading tests."""

import math

import numpy as np
import pytest

from qghz.model import (
    ConfigError,
    DetectorKind,
    DetectorModel,
    EmitterArrayConfig,
    HeraldRecord,
    NoisyWState,
    SingleExcitationDM,
    load_config,
    validate,
)

TWO_PI = 2.0 * math.pi


class TestEmitterArrayConfig:
    def test_uniform_builder(self):
        c = EmitterArrayConfig.uniform(4, 0.2, linewidth=3.0, frequency=1.5)
        assert c.linewidths == (3.0,) * 4
        assert c.frequencies == (1.5,) * 4
        validate(c)

    def test_detunings_antisymmetric(self):
        c = EmitterArrayConfig(
            d=3, p=0.1, linewidths=(1.0,) * 3, frequencies=(0.0, 2.0, 5.0)
        )
        D = c.detunings()
        assert np.allclose(D, -D.T)
        assert D[2, 0] == 5.0

    def test_validate_reports_all_violations(self):
        c = EmitterArrayConfig(
            d=1, p=1.5, linewidths=(0.0,), frequencies=(0.0, 1.0)
        )
        with pytest.raises(ConfigError) as info:
            validate(c)
        joined = " ".join(info.value.violations)
        assert "d:" in joined
        assert "p:" in joined
        assert "frequencies:" in joined
        assert "linewidths[0]:" in joined

    def test_with_replaces_fields(self):
        c = EmitterArrayConfig.uniform(3, 0.1)
        assert c.with_(p=0.4).p == 0.4
        assert c.p == 0.1  # frozen original


class TestDetectorModel:
    def test_defaults(self):
        det = DetectorModel()
        assert det.kind is DetectorKind.NUMBER_RESOLVING
        assert det.dead_time == math.inf

    def test_rejects_negative_jitter(self):
        with pytest.raises(ConfigError):
            DetectorModel(jitter=-1.0)

    def test_rejects_zero_dead_time(self):
        with pytest.raises(ConfigError):
            DetectorModel(dead_time=0.0)


class TestSingleExcitationDM:
    def test_w_state_fidelity_is_one(self):
        w = SingleExcitationDM.w_state(4)
        assert w.fidelity_to_w() == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed_fidelity(self):
        rho = SingleExcitationDM(np.eye(3) / 3)
        assert rho.fidelity_to_w() == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_rejects_non_hermitian(self):
        m = np.eye(2, dtype=complex)
        m[0, 1] = 0.5
        with pytest.raises(ValueError, match="Hermitian"):
            SingleExcitationDM(m)

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError, match="trace"):
            SingleExcitationDM(np.eye(2) * 0.7)

    def test_rejects_negative_eigenvalue(self):
        m = np.array([[1.5, 0.0], [0.0, -0.5]], dtype=complex)
        with pytest.raises(ValueError, match="PSD"):
            SingleExcitationDM(m)

    def test_matrix_is_read_only(self):
        w = SingleExcitationDM.w_state(2)
        with pytest.raises(ValueError):
            w.matrix[0, 0] = 2.0


class TestNoisyWState:
    def test_weights_must_normalize(self):
        with pytest.raises(ValueError, match="sum"):
            NoisyWState(d=3, weights={(0, 1): 0.5})

    def test_rejects_invalid_signature(self):
        with pytest.raises(ValueError, match="signature"):
            NoisyWState(d=3, weights={(3, 1): 1.0})

    def test_excitation_weights_aggregate(self):
        s = NoisyWState(d=3, weights={(0, 1): 0.6, (1, 1): 0.3, (0, 2): 0.1})
        assert s.excitation_weights() == pytest.approx({1: 0.6, 2: 0.4})


class TestHeraldRecord:
    def test_valid(self):
        h = HeraldRecord(mode=2, spin_outcomes=(0, 1, 1))
        assert h.mode == 2

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            HeraldRecord(mode=0, spin_outcomes=(0, 2))


class TestLoadConfig:
    def _write(self, tmp_path, text):
        path = tmp_path / "config.toml"
        path.write_text(text)
        return path

    def test_full_roundtrip(self, tmp_path):
        path = self._write(
            tmp_path,
            """
            [emitters]
            d = 3
            p = 0.06
            linewidths_hz = 1.0e9
            frequencies_hz = [-10.0e9, 0.0, 10.0e9]
            dephasing_rate = 0.0088
            eta1 = 0.53
            eta2 = 0.53

            [detector]
            kind = "threshold"
            jitter_s = 3.0e-12
            time_resolved = true

            [protocol]
            n_photons = 3
            seed = 5
            """,
        )
        config, detector, protocol = load_config(path)
        assert config.d == 3
        assert config.linewidths == (TWO_PI * 1.0e9,) * 3
        assert config.frequencies[0] == pytest.approx(-TWO_PI * 10.0e9)
        assert detector.kind is DetectorKind.THRESHOLD
        assert detector.jitter == 3.0e-12
        assert detector.time_resolved is True
        assert protocol == {"n_photons": 3, "seed": 5}

    def test_scalar_broadcast(self, tmp_path):
        path = self._write(
            tmp_path,
            "[emitters]\nd = 4\np = 0.1\nlinewidths_hz = 2.0\n",
        )
        config, _, _ = load_config(path)
        assert config.linewidths == (TWO_PI * 2.0,) * 4

    def test_missing_required_keys(self, tmp_path):
        path = self._write(tmp_path, "[emitters]\nd = 3\n")
        with pytest.raises(ConfigError, match="required"):
            load_config(path)

    def test_unknown_detector_kind(self, tmp_path):
        path = self._write(
            tmp_path,
            "[emitters]\nd = 3\np = 0.1\n[detector]\nkind = \"bolometer\"\n",
        )
        with pytest.raises(ConfigError, match="bolometer"):
            load_config(path)

    def test_wrong_length_list(self, tmp_path):
        path = self._write(
            tmp_path,
            "[emitters]\nd = 3\np = 0.1\nfrequencies_hz = [1.0, 2.0]\n",
        )
        with pytest.raises(ConfigError):
            load_config(path)

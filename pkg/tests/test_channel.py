"""Physical-layer oracles: closed-form SINR/data/energy values, MMSE
precoder limits with known answers, and the quantised channel chain."""
from __future__ import annotations

import numpy as np
import pytest

from uavsched.channel import (
    DEFAULT_FSMC_LEVELS,
    FsmcModel,
    RadioConfig,
    birth_death_transition,
    comm_energy_per_slot,
    data_per_slot,
    fsmc_quantize,
    fsmc_step,
    gen_rician_channel,
    mmse_effective_gains,
    sinr,
)


class TestRadioConfig:
    def test_defaults_validate(self):
        RadioConfig().validate()

    @pytest.mark.parametrize(
        "field,value",
        [
            ("bandwidth_hz", 0.0),
            ("slot_duration_s", -1.0),
            ("slots_per_frame", 0),
            ("noise_power_w", 0.0),
            ("tx_power_w", 0.0),
            ("antennas", 0),
        ],
    )
    def test_rejects_nonpositive(self, field, value):
        cfg = RadioConfig(**{field: value})
        with pytest.raises(ValueError, match=field):
            cfg.validate()


class TestRician:
    def test_shape_and_pure_los(self):
        rng = np.random.default_rng(0)
        h = gen_rician_channel(rng, 3, 5, rice_factor=np.inf)
        assert h.shape == (3, 5)
        assert np.allclose(h, 1.0)

    def test_path_loss_scales_amplitude(self):
        rng = np.random.default_rng(0)
        h = gen_rician_channel(rng, 2, 4, rice_factor=np.inf, path_loss_db=10.0)
        assert np.allclose(np.abs(h), 0.1)

    def test_negative_factor_rejected(self):
        with pytest.raises(ValueError):
            gen_rician_channel(np.random.default_rng(0), 1, 1, rice_factor=-1.0)

    def test_mixing_preserves_unit_mean_power(self):
        # K/(K+1) + 1/(K+1) = 1, so E|h|^2 = 1 for any Rice factor
        rng = np.random.default_rng(42)
        h = gen_rician_channel(rng, 200, 200, rice_factor=3.0)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.02)


class TestMmse:
    def test_orthogonal_channels_give_identity_gains(self):
        # H = I: user channels are orthogonal, the normalised precoder is I,
        # so each user sees exactly their own unit gain and zero leakage.
        beta = mmse_effective_gains(np.eye(3, dtype=complex), noise_power_w=1e-4)
        assert np.allclose(beta, np.eye(3), atol=1e-12)

    def test_single_user_is_matched_filter(self):
        # One user: the unit-power precoder aligns with h, giving |h|^2.
        rng = np.random.default_rng(1)
        h = rng.standard_normal((1, 6)) + 1j * rng.standard_normal((1, 6))
        beta = mmse_effective_gains(h, noise_power_w=1e-4)
        assert beta.shape == (1, 1)
        assert beta[0, 0] == pytest.approx(float(np.sum(np.abs(h) ** 2)), rel=1e-12)

    def test_low_noise_limit_cancels_interference(self):
        # sigma^2 -> 0 turns MMSE into zero-forcing: cross gains vanish.
        rng = np.random.default_rng(2)
        h = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        beta = mmse_effective_gains(h, noise_power_w=1e-12)
        off = beta[~np.eye(4, dtype=bool)]
        assert np.all(off < 1e-9 * np.diag(beta).min())

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            mmse_effective_gains(np.ones(3, dtype=complex), 1e-4)


class TestSinrDataEnergy:
    def test_single_user_sinr(self):
        # One member: no interference, gamma = beta * p / sigma^2.
        beta = np.array([[2.4]])
        assert sinr(beta, 0, tx_power_w=3.0, noise_power_w=1e-4) == pytest.approx(
            2.4 * 3.0 / 1e-4, rel=1e-12
        )

    def test_two_user_sinr(self):
        beta = np.array([[0.8, 0.1], [0.3, 0.9]])
        g0 = sinr(beta, 0, 3.0, 1e-4)
        g1 = sinr(beta, 1, 3.0, 1e-4)
        assert g0 == pytest.approx(0.8 * 3.0 / (0.1 * 3.0 + 1e-4), rel=1e-12)
        assert g1 == pytest.approx(0.9 * 3.0 / (0.3 * 3.0 + 1e-4), rel=1e-12)

    def test_data_per_slot_closed_form(self):
        # gamma = 3 makes log2(1+gamma) exactly 2: 1 ms * 10 MHz * 2 = 20 kbit.
        cfg = RadioConfig()
        assert data_per_slot(3.0, cfg) == pytest.approx(20_000.0, rel=1e-12)
        assert data_per_slot(0.0, cfg) == 0.0
        with pytest.raises(ValueError):
            data_per_slot(-0.1, cfg)

    def test_comm_energy_uses_own_gain_scaling(self):
        # Phi * (sum of diagonal gains) * p
        cfg = RadioConfig()
        beta = np.array([[0.9, 0.5], [0.7, 1.5]])
        assert comm_energy_per_slot(beta, cfg) == pytest.approx(
            1e-3 * (0.9 + 1.5) * 3.0, rel=1e-12
        )


class TestFsmc:
    def test_default_levels_ladder(self):
        assert DEFAULT_FSMC_LEVELS == tuple(
            pytest.approx(0.3 * i, abs=1e-9) for i in range(9)
        )
        assert len(DEFAULT_FSMC_LEVELS) == 9

    def test_birth_death_rows(self):
        t = birth_death_transition(9, stay=0.4, move=0.3)
        assert np.allclose(t.sum(axis=1), 1.0)
        assert t[4, 3] == t[4, 5] == pytest.approx(0.3)
        assert t[4, 4] == pytest.approx(0.4)
        # boundaries fold the missing neighbour into stay
        assert t[0, 0] == pytest.approx(0.7)
        assert t[0, 1] == pytest.approx(0.3)
        assert t[8, 8] == pytest.approx(0.7)
        # doubly stochastic: the uniform law is stationary
        assert np.allclose(t.sum(axis=0), 1.0)

    def test_birth_death_validation(self):
        with pytest.raises(ValueError):
            birth_death_transition(0)
        with pytest.raises(ValueError):
            birth_death_transition(5, stay=0.5, move=0.3)
        assert birth_death_transition(1)[0, 0] == 1.0

    def test_model_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            FsmcModel(levels=(0.0, 0.3, 0.3), transition=np.eye(3))
        with pytest.raises(ValueError, match="shape"):
            FsmcModel(levels=(0.0, 1.0), transition=np.eye(3))
        bad = np.array([[0.5, 0.4], [0.5, 0.5]])
        with pytest.raises(ValueError, match="probability"):
            FsmcModel(levels=(0.0, 1.0), transition=bad)

    def test_quantize_nearest_with_lower_ties(self):
        levels = FsmcModel().level_array()
        assert fsmc_quantize(0.44, levels) == 1
        assert fsmc_quantize(0.46, levels) == 2
        assert fsmc_quantize(0.0, levels) == 0
        assert fsmc_quantize(99.0, levels) == 8
        # exact tie resolves to the lower index
        assert fsmc_quantize(0.5, np.array([0.0, 1.0, 2.0])) == 0

    def test_step_bounds_and_determinism(self):
        model = FsmcModel()
        states = np.array([0, 4, 8, 2, 6])
        a = fsmc_step(states, model.transition, np.random.default_rng(5))
        b = fsmc_step(states, model.transition, np.random.default_rng(5))
        assert np.array_equal(a, b)
        assert a.min() >= 0 and a.max() < model.n_levels
        # one step moves at most one level
        assert np.all(np.abs(a - states) <= 1)

    def test_step_matches_transition_law(self):
        model = FsmcModel()
        rng = np.random.default_rng(9)
        draws = fsmc_step(np.full(40_000, 4), model.transition, rng)
        freq = np.bincount(draws, minlength=9) / draws.size
        assert freq[3] == pytest.approx(0.3, abs=0.02)
        assert freq[4] == pytest.approx(0.4, abs=0.02)
        assert freq[5] == pytest.approx(0.3, abs=0.02)

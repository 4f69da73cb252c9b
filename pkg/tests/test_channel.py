"""FIR channel application, noise calibration and per-bin equalization."""
import numpy as np
import pytest

import oracles
from gfdmkit import (
    BlockSignal,
    ChannelModel,
    LengthMismatchError,
    ZeroBinError,
    add_cp,
    apply_channel,
    build_matrix,
    demodulate,
    fde_equalize,
    load_taps_csv,
    make_preset,
    modulate,
    noise_variance,
    pulse_from_config,
    remove_cp,
)
from gfdmkit.modem import ResourceGrid


def _frame(rng, S=48, cp=8):
    x = BlockSignal(rng.standard_normal(S) + 1j * rng.standard_normal(S))
    return x, add_cp(x, cp)


class TestChannelModel:
    def test_taps_normalized_on_construction(self):
        ch = ChannelModel(taps=[3.0, 4.0])
        assert abs(np.linalg.norm(ch.taps) - 1.0) <= 1e-15
        np.testing.assert_allclose(ch.taps, [0.6, 0.8])

    def test_zero_taps_rejected(self):
        with pytest.raises(ValueError):
            ChannelModel(taps=[0.0, 0.0])

    def test_awgn_factory(self):
        ch = ChannelModel.awgn(10.0, rng_seed=5)
        np.testing.assert_array_equal(ch.taps, [1.0])
        assert ch.snr_db == 10.0 and ch.rng_seed == 5

    def test_with_seed(self):
        ch = ChannelModel.awgn(3.0).with_seed(42)
        assert ch.rng_seed == 42 and ch.snr_db == 3.0


class TestApplyChannel:
    def test_identity_channel(self, rng):
        _, fr = _frame(rng)
        out = apply_channel(fr, ChannelModel(taps=[1.0]))
        np.testing.assert_array_equal(out.samples, fr.samples)
        assert not out.taps_exceed_cp

    def test_two_tap_definition(self, rng):
        _, fr = _frame(rng)
        ch = ChannelModel(taps=[1.0, 0.5])
        out = apply_channel(fr, ch)
        x = fr.samples
        expected = x.copy() * ch.taps[0]
        expected[1:] += ch.taps[1] * x[:-1]
        np.testing.assert_allclose(out.samples, expected, atol=1e-14)

    def test_matches_truncated_convolution_oracle(self, rng):
        _, fr = _frame(rng)
        ch = ChannelModel(taps=rng.standard_normal(5) + 1j * rng.standard_normal(5))
        out = apply_channel(fr, ch)
        np.testing.assert_allclose(
            out.samples, oracles.linear_convolve_truncated(fr.samples, ch.taps), atol=1e-12
        )

    def test_seed_determinism(self, rng):
        _, fr = _frame(rng)
        ch = ChannelModel.awgn(5.0, rng_seed=11)
        a = apply_channel(fr, ch).samples
        b = apply_channel(fr, ch).samples
        np.testing.assert_array_equal(a, b)
        c = apply_channel(fr, ch.with_seed(12)).samples
        assert np.max(np.abs(a - c)) > 1e-3

    def test_explicit_generator_stream(self, rng):
        _, fr = _frame(rng)
        ch = ChannelModel.awgn(5.0)
        g = np.random.default_rng(3)
        first = apply_channel(fr, ch, rng=g).samples
        second = apply_channel(fr, ch, rng=g).samples  # stream advances
        assert np.max(np.abs(first - second)) > 1e-3
        np.testing.assert_array_equal(
            first, apply_channel(fr, ch, rng=np.random.default_rng(3)).samples
        )

    def test_long_taps_set_warning_flag(self, rng):
        _, fr = _frame(rng, cp=2)
        out = apply_channel(fr, ChannelModel(taps=np.ones(4)))
        assert out.taps_exceed_cp

    def test_noise_power_calibrated_within_one_percent(self):
        S = 1_000_000
        x = BlockSignal(np.full(S, 1.0 + 0.0j))
        fr = add_cp(x, 0)
        snr_db = 10.0
        out = apply_channel(fr, ChannelModel.awgn(snr_db, rng_seed=0))
        noise = out.samples - fr.samples
        measured = np.mean(np.abs(noise) ** 2)
        expected = noise_variance(fr.samples, snr_db)
        assert expected == pytest.approx(0.1)
        assert abs(measured - expected) <= 0.01 * expected


class TestNoiseVariance:
    def test_relative_to_frame_power(self, rng):
        x = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        p = np.mean(np.abs(x) ** 2)
        assert noise_variance(x, 0.0) == pytest.approx(p)
        assert noise_variance(x, 20.0) == pytest.approx(p / 100.0)


class TestFdeEqualize:
    def test_single_tap_identity(self, rng):
        x, _ = _frame(rng)
        out = fde_equalize(x, [1.0], mode="zf")
        np.testing.assert_allclose(out.samples, x.samples, atol=1e-12)

    def test_multipath_within_cp_inverts_exactly(self, rng):
        x, fr = _frame(rng, S=64, cp=8)
        taps = (rng.standard_normal(5) + 1j * rng.standard_normal(5)) / 3.0
        ch = ChannelModel(taps=taps)
        received = apply_channel(fr, ch)
        eq = fde_equalize(remove_cp(received), ch.taps, mode="zf")
        np.testing.assert_allclose(eq.samples, x.samples, atol=1e-9)

    def test_spectral_null_identified(self, rng):
        x, _ = _frame(rng)
        with pytest.raises(ZeroBinError) as exc:
            fde_equalize(x, [1.0, -1.0], mode="zf")
        assert 0 in exc.value.bins

    def test_mmse_limits_to_zf(self, rng):
        x, _ = _frame(rng)
        taps = [0.9, 0.3 + 0.2j]
        zf = fde_equalize(x, taps, mode="zf").samples
        mmse = fde_equalize(x, taps, mode="mmse", noise_var=1e-12).samples
        np.testing.assert_allclose(mmse, zf, atol=1e-8)

    def test_mmse_attenuates_weak_bins(self, rng):
        # near-null channel: ZF would blow the bin up, MMSE keeps it bounded
        x, _ = _frame(rng)
        taps = np.array([1.0, -0.999])
        mmse = fde_equalize(x, taps, mode="mmse", noise_var=0.1).samples
        assert np.all(np.isfinite(mmse))

    def test_argument_validation(self, rng):
        x, _ = _frame(rng, S=4, cp=0)
        with pytest.raises(ValueError):
            fde_equalize(x, [1.0], mode="dfe")
        with pytest.raises(ValueError):
            fde_equalize(x, [1.0], mode="mmse")
        with pytest.raises(LengthMismatchError):
            fde_equalize(x, np.ones(9), mode="zf")


def test_end_to_end_noiseless_recovery(rng):
    """CP plus per-bin equalization makes a short FIR channel transparent."""
    v, _ = make_preset("ofdm")
    g = pulse_from_config(v)
    A = build_matrix(g, v.grid)
    K, M = v.grid.num_subcarriers, v.grid.num_subsymbols
    d = ResourceGrid((rng.integers(0, 2, (K, M)) * 2 - 1) + 1j * (rng.integers(0, 2, (K, M)) * 2 - 1), v.grid)
    taps = np.array([0.8, 0.0, 0.4 - 0.2j, 0.1j])
    ch = ChannelModel(taps=taps)
    fr = add_cp(modulate(d, g), v.config.cp_length)
    eq = fde_equalize(remove_cp(apply_channel(fr, ch)), ch.taps, mode="zf")
    est = demodulate(eq, A, receiver="mf")
    assert np.max(np.abs(est.symbols - d.symbols)) <= 1e-8


class TestTapsCsv:
    def test_load_with_and_without_header(self, tmp_path):
        p = tmp_path / "taps.csv"
        p.write_text("re,im\n1.0,0.0\n0.5,-0.25\n")
        np.testing.assert_allclose(load_taps_csv(p), [1.0, 0.5 - 0.25j])
        p.write_text("1.0,0.0\n0.5,-0.25\n")
        np.testing.assert_allclose(load_taps_csv(p), [1.0, 0.5 - 0.25j])

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(ValueError):
            load_taps_csv(p)

import numpy as np
import pytest

from modclass.channel import (
    ChannelMatrix,
    ReceivedBundle,
    add_awgn,
    calibrate_noise,
    mimo_transmit,
    sample_channel,
)
from modclass.errors import ConfigurationError, NumericError
from modclass.sigsynth import RealSignal, generate_symbols, modulate


@pytest.fixture
def carrier(params):
    t = np.arange(params.num_samples) / params.sample_rate_hz
    return RealSignal(np.cos(2 * np.pi * params.carrier_hz * t), params.sample_rate_hz)


class TestAddAwgn:
    def test_infinite_snr_is_identity(self, carrier):
        out = add_awgn(carrier, np.inf, 0)
        assert np.array_equal(out.samples, carrier.samples)
        assert out.samples is not carrier.samples

    def test_realized_snr_close_to_target(self, carrier):
        # average realized SNR over 100 independent seeds within +/-0.2 dB
        target = 10.0
        realized = []
        for seed in range(100):
            noisy = add_awgn(carrier, target, seed)
            noise = noisy.samples - carrier.samples
            realized.append(
                10.0 * np.log10(carrier.power / np.mean(np.square(noise)))
            )
        assert abs(np.mean(realized) - target) < 0.2

    def test_zero_power_rejected(self):
        silent = RealSignal(np.zeros(100), 16000.0)
        with pytest.raises(NumericError):
            add_awgn(silent, 10.0, 0)

    def test_determinism(self, carrier):
        a = add_awgn(carrier, 5.0, 42)
        b = add_awgn(carrier, 5.0, 42)
        assert np.array_equal(a.samples, b.samples)

    def test_calibrate_noise_variance(self, carrier):
        model = calibrate_noise(carrier, 0.0)
        assert model.variance == pytest.approx(carrier.power)


class TestSampleChannel:
    def test_shapes_and_ranges(self):
        ch = sample_channel(2, 4, 0.01, 123)
        assert ch.gains.shape == (4, 2)
        assert ch.offsets_s.shape == (4, 2)
        assert ch.gains.min() >= 0.0 and ch.gains.max() <= 1.0
        assert ch.offsets_s.min() >= 0.0 and ch.offsets_s.max() < 0.01
        assert ch.nt == 2 and ch.nr == 4

    def test_siso_degenerate_shape(self):
        ch = sample_channel(1, 1, 0.01, 5)
        assert ch.gains.shape == (1, 1)

    def test_rank_guard_over_many_seeds(self):
        for seed in range(200):
            ch = sample_channel(2, 4, 0.01, seed)
            assert np.linalg.svd(ch.gains, compute_uv=False).min() >= 1e-3

    def test_resampling_triggers_on_near_singular_draw(self):
        # find a seed whose first raw uniform draw violates the rank guard
        bad_seed = None
        for seed in range(200_000):
            if np.random.default_rng(seed).uniform() < 1e-3:
                bad_seed = seed
                break
        assert bad_seed is not None, "no near-singular seed found in scan"
        first_draw = np.random.default_rng(bad_seed).uniform()
        ch = sample_channel(1, 1, 0.01, bad_seed)
        assert ch.gains[0, 0] != first_draw
        assert np.linalg.svd(ch.gains, compute_uv=False).min() >= 1e-3

    def test_nr_less_than_nt_rejected(self):
        with pytest.raises(ConfigurationError):
            sample_channel(4, 2, 0.01, 0)

    def test_determinism(self):
        a = sample_channel(2, 4, 0.01, 77)
        b = sample_channel(2, 4, 0.01, 77)
        assert np.array_equal(a.gains, b.gains)
        assert np.array_equal(a.offsets_s, b.offsets_s)


class TestChannelMatrix:
    def test_gain_range_enforced(self):
        with pytest.raises(ConfigurationError):
            ChannelMatrix(np.array([[1.5]]), np.array([[0.0]]), 0.01)

    def test_offset_range_enforced(self):
        with pytest.raises(ConfigurationError):
            ChannelMatrix(np.array([[0.5]]), np.array([[0.01]]), 0.01)


def _identity_channel(n, period=0.01):
    return ChannelMatrix(np.eye(n), np.zeros((n, n)), period)


class TestMimoTransmit:
    def test_identity_channel_no_noise(self, params, scheme):
        streams = [
            modulate(scheme("4psk"), generate_symbols(4, 14, s), params) for s in (1, 2)
        ]
        ch = _identity_channel(2)
        bundle = mimo_transmit(streams, ch, np.inf, 0)
        assert len(bundle.branches) == 2
        for got, sent in zip(bundle.branches, streams):
            assert np.array_equal(got.samples, sent.samples)

    def test_mimo_2x4_structure(self, params, scheme):
        streams = [
            modulate(scheme("2fsk"), generate_symbols(2, 14, s), params) for s in (3, 4)
        ]
        ch = sample_channel(2, 4, params.symbol_period_s, 9)
        bundle = mimo_transmit(streams, ch, np.inf, 0, truth_label=scheme("2fsk"))
        assert len(bundle.branches) == 4
        assert bundle.truth_label == scheme("2fsk")
        # each branch is the gain-weighted sum of the two delayed streams
        delays = np.rint(ch.offsets_s * params.sample_rate_hz).astype(int)
        for i, branch in enumerate(bundle.branches):
            expected = np.zeros(params.num_samples)
            for j, stream in enumerate(streams):
                shifted = np.zeros(params.num_samples)
                d = delays[i, j]
                shifted[d:] = stream.samples[: params.num_samples - d]
                expected += ch.gains[i, j] * shifted
            assert np.allclose(branch.samples, expected, atol=1e-12)

    def test_single_path_power_scaling(self, params, scheme):
        signal = modulate(scheme("2psk"), generate_symbols(2, 14, 8), params)
        gain = 0.37
        ch = ChannelMatrix(np.array([[gain]]), np.array([[0.0]]), params.symbol_period_s)
        bundle = mimo_transmit([signal], ch, np.inf, 0)
        out_power = bundle.branches[0].power
        assert abs(out_power - gain**2 * signal.power) < 1e-9

    def test_superposition(self, params, scheme):
        a = modulate(scheme("2ask"), generate_symbols(2, 14, 1), params)
        b = modulate(scheme("4psk"), generate_symbols(4, 14, 2), params)
        both = RealSignal(a.samples + b.samples, params.sample_rate_hz)
        ch = sample_channel(1, 2, params.symbol_period_s, 11)
        out_a = mimo_transmit([a], ch, np.inf, 0)
        out_b = mimo_transmit([b], ch, np.inf, 0)
        out_sum = mimo_transmit([both], ch, np.inf, 0)
        for i in range(2):
            assert np.allclose(
                out_sum.branches[i].samples,
                out_a.branches[i].samples + out_b.branches[i].samples,
                atol=1e-12,
            )

    def test_noise_independence_across_branches(self, params, scheme):
        signal = modulate(scheme("2psk"), generate_symbols(2, 14, 5), params)
        ch = _identity_channel(2)
        clean = mimo_transmit([signal, signal], ch, np.inf, 0)
        noisy = mimo_transmit([signal, signal], ch, 0.0, 31)
        n0 = noisy.branches[0].samples - clean.branches[0].samples
        n1 = noisy.branches[1].samples - clean.branches[1].samples
        corr = np.corrcoef(n0, n1)[0, 1]
        assert abs(corr) < 0.05

    def test_per_branch_snr_calibration(self, params, scheme):
        # 100-seed realized SNR per branch stays within +/-0.3 dB
        streams = [
            modulate(scheme("4psk"), generate_symbols(4, 14, s), params) for s in (1, 2)
        ]
        ch = sample_channel(2, 4, params.symbol_period_s, 13)
        clean = mimo_transmit(streams, ch, np.inf, 0)
        target = 4.0
        realized = np.zeros((100, 4))
        for seed in range(100):
            noisy = mimo_transmit(streams, ch, target, seed)
            for i in range(4):
                noise = noisy.branches[i].samples - clean.branches[i].samples
                realized[seed, i] = 10 * np.log10(
                    clean.branches[i].power / np.mean(np.square(noise))
                )
        assert np.abs(realized.mean(axis=0) - target).max() < 0.3

    def test_stream_count_mismatch(self, params, scheme):
        signal = modulate(scheme("2psk"), generate_symbols(2, 14, 5), params)
        ch = _identity_channel(2)
        with pytest.raises(ConfigurationError):
            mimo_transmit([signal], ch, np.inf, 0)

    def test_length_mismatch(self, params):
        ch = _identity_channel(2)
        a = RealSignal(np.ones(100), 16000.0)
        b = RealSignal(np.ones(101), 16000.0)
        with pytest.raises(ConfigurationError):
            mimo_transmit([a, b], ch, np.inf, 0)


class TestReceivedBundle:
    def test_unequal_branches_rejected(self):
        with pytest.raises(ConfigurationError):
            ReceivedBundle(
                (RealSignal(np.ones(4), 1.0), RealSignal(np.ones(5), 1.0)), 0.0
            )

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            ReceivedBundle((), 0.0)

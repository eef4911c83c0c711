import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modclass.errors import ConfigurationError
from modclass.sigsynth import (
    THETA1,
    THETA2,
    Family,
    ModulationScheme,
    RealSignal,
    SignalParams,
    SymbolSequence,
    fsk_tone_hz,
    generate_symbols,
    modulate,
)
from oracles import dft_full_magnitudes, dft_magnitudes


class TestModulationScheme:
    def test_label_sets(self):
        assert [s.name for s in THETA1] == [
            "2ASK", "2FSK", "2PSK", "4ASK", "4FSK", "4PSK", "8PSK", "16QAM",
        ]
        assert THETA2 == THETA1[:6]

    @pytest.mark.parametrize("name", ["2ask", "4FSK", "8psk", "16QAM"])
    def test_from_name_round_trip(self, name):
        s = ModulationScheme.from_name(name)
        assert ModulationScheme.from_name(s.name) == s

    @pytest.mark.parametrize("family,order", [
        (Family.ASK, 3),   # not a power of two
        (Family.ASK, 1),
        (Family.QAM, 8),   # not a perfect square
        (Family.ASK, 8),   # outside the label set
        (Family.PSK, 16),
    ])
    def test_invalid_schemes(self, family, order):
        with pytest.raises(ConfigurationError):
            ModulationScheme(family, order)

    def test_bad_name(self):
        with pytest.raises(ConfigurationError):
            ModulationScheme.from_name("qpsk4")


class TestGenerateSymbols:
    def test_range_and_reproducibility(self):
        a = generate_symbols(2, 14, 123)
        b = generate_symbols(2, 14, 123)
        assert np.array_equal(a.symbols, b.symbols)
        assert a.symbols.min() >= 0 and a.symbols.max() <= 1
        assert len(a) == 14

    def test_uniformity(self):
        # frequency of each of 4 symbols within 1% of 0.25 over 1e5 draws
        seq = generate_symbols(4, 100_000, 99)
        freqs = np.bincount(seq.symbols, minlength=4) / len(seq)
        assert np.abs(freqs - 0.25).max() < 0.01 * 0.25 + 0.005
        assert np.abs(freqs - 0.25).max() < 0.0025  # within 1% of 0.25

    @pytest.mark.parametrize("order", [1, 0, 3, 6])
    def test_invalid_order(self, order):
        with pytest.raises(ConfigurationError):
            generate_symbols(order, 5, 0)

    def test_invalid_count(self):
        with pytest.raises(ConfigurationError):
            generate_symbols(2, 0, 0)

    @given(
        order=st.sampled_from([2, 4, 8, 16]),
        count=st.integers(1, 200),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_containment_property(self, order, count, seed):
        seq = generate_symbols(order, count, seed)
        assert len(seq) == count
        assert seq.symbols.min() >= 0
        assert seq.symbols.max() < order


class TestSymbolSequence:
    def test_out_of_range_entry(self):
        with pytest.raises(ConfigurationError):
            SymbolSequence(np.array([0, 1, 4]), 4)

    def test_empty(self):
        with pytest.raises(ConfigurationError):
            SymbolSequence(np.array([], dtype=np.int64), 2)


class TestSignalParams:
    def test_non_integer_sps(self):
        with pytest.raises(ConfigurationError):
            SignalParams(sample_rate_hz=16000.0, symbol_rate_hz=300.0)

    def test_derived_values(self, params):
        assert params.samples_per_symbol == 160
        assert params.num_samples == 2240
        assert params.symbol_period_s == pytest.approx(0.01)


class TestModulateAsk:
    def test_2ask_zero_symbol_is_silent(self, params, scheme):
        symbols = SymbolSequence(np.array([0] * 7 + [1] * 7), 2)
        signal = modulate(scheme("2ask"), symbols, params)
        assert len(signal) == 2240
        assert np.all(signal.samples[: 7 * 160] == 0.0)
        assert np.any(signal.samples[7 * 160 :] != 0.0)

    def test_4ask_levels(self, params, scheme):
        symbols = SymbolSequence(np.array([0, 1, 2, 3] * 3 + [0, 3]), 4)
        signal = modulate(scheme("4ask"), symbols, params)
        segments = signal.samples.reshape(14, 160)
        peaks = np.abs(segments).max(axis=1)
        expected = np.array([0, 1 / 3, 2 / 3, 1] * 3 + [0, 1])[: len(peaks)]
        assert np.allclose(peaks, expected, atol=1e-9)


class TestModulatePsk:
    def test_2psk_pi_phase_jump(self, scheme):
        # symbol 1 is the carrier negated: a pi phase mutation at the boundary
        params = SignalParams(num_symbols=2)
        signal = modulate(scheme("2psk"), SymbolSequence(np.array([0, 1]), 2), params)
        t = np.arange(320) / 16000.0
        carrier = np.cos(2 * np.pi * 2000.0 * t)
        assert np.allclose(signal.samples[:160], carrier[:160], atol=1e-12)
        assert np.allclose(signal.samples[160:], -carrier[160:], atol=1e-12)

    def test_phase_map(self, scheme):
        params = SignalParams(num_symbols=4)
        signal = modulate(
            scheme("4psk"), SymbolSequence(np.arange(4), 4), params
        )
        t = np.arange(640) / 16000.0
        for m in range(4):
            seg = slice(m * 160, (m + 1) * 160)
            ref = np.cos(2 * np.pi * 2000.0 * t[seg] + 2 * np.pi * m / 4)
            assert np.allclose(signal.samples[seg], ref, atol=1e-12)


class TestModulateFsk:
    def test_4fsk_dominant_tones(self, scheme):
        # peak-pick a brute-force DFT of each single-symbol segment
        params = SignalParams(num_symbols=14)
        symbols = SymbolSequence(np.array([0, 1, 2, 3] * 3 + [1, 2]), 4)
        signal = modulate(scheme("4fsk"), symbols, params)
        segments = signal.samples.reshape(14, 160)
        expected_hz = {0: 1400.0, 1: 1800.0, 2: 2200.0, 3: 2600.0}
        for seg, sym in zip(segments, symbols.symbols):
            mags = dft_full_magnitudes(seg)
            peak_hz = mags[1:].argmax() * 16000.0 / 160.0 + 100.0
            assert peak_hz == expected_hz[int(sym)]

    def test_tone_map(self, params, scheme):
        s = scheme("2fsk")
        assert fsk_tone_hz(s, params, 0) == 1800.0
        assert fsk_tone_hz(s, params, 1) == 2200.0

    def test_nyquist_violation(self, scheme):
        params = SignalParams(carrier_hz=7800.0, fsk_tone_spacing_hz=400.0)
        with pytest.raises(ConfigurationError):
            modulate(scheme("4fsk"), generate_symbols(4, 14, 0), params)

    def test_negative_tone_rejected(self, scheme):
        params = SignalParams(carrier_hz=500.0, fsk_tone_spacing_hz=400.0)
        with pytest.raises(ConfigurationError):
            modulate(scheme("4fsk"), generate_symbols(4, 14, 0), params)


class TestModulateQam:
    def _demod_rails(self, signal, params):
        sps = params.samples_per_symbol
        n_sym = params.num_symbols
        t = np.arange(len(signal)).reshape(n_sym, sps) / params.sample_rate_hz
        segments = signal.samples.reshape(n_sym, sps)
        a = 2.0 * np.mean(segments * np.cos(2 * np.pi * params.carrier_hz * t), axis=1)
        b = 2.0 * np.mean(segments * np.sin(2 * np.pi * params.carrier_hz * t), axis=1)
        return a, b

    def test_16qam_rail_levels(self, params, scheme):
        symbols = generate_symbols(16, 14, 7)
        signal = modulate(scheme("16qam"), symbols, params)
        a, b = self._demod_rails(signal, params)
        levels = {-3.0, -1.0, 1.0, 3.0}
        assert {round(v, 6) for v in a} <= levels
        assert {round(v, 6) for v in b} <= levels
        # mapping: symbol -> (a index, b index) base sqrt(M)
        expect_a = 2.0 * (symbols.symbols % 4 + 1) - 5.0
        expect_b = 2.0 * (symbols.symbols // 4 + 1) - 5.0
        assert np.allclose(a, expect_a, atol=1e-9)
        assert np.allclose(b, expect_b, atol=1e-9)

    def test_unit_power_flag(self, scheme):
        params = SignalParams(qam_unit_power=True)
        signal = modulate(scheme("16qam"), generate_symbols(16, 14, 7), params)
        # rails scaled so the long-run mean power matches the 0.5 carrier convention
        assert 0.2 < signal.power < 0.8


class TestEnergyInvariant:
    @pytest.mark.parametrize("name", ["2psk", "4psk", "8psk", "2fsk", "4fsk"])
    def test_per_symbol_power_is_half(self, params, scheme, name):
        s = scheme(name)
        signal = modulate(s, generate_symbols(s.order, 14, 5), params)
        segments = signal.samples.reshape(14, 160)
        power = np.mean(np.square(segments), axis=1)
        assert np.abs(power - 0.5).max() < 1e-9


class TestDeterminism:
    @pytest.mark.parametrize("name", ["2ask", "4fsk", "8psk", "16qam"])
    def test_bit_identical(self, params, scheme, name):
        s = scheme(name)
        symbols = generate_symbols(s.order, 14, 21)
        first = modulate(s, symbols, params)
        second = modulate(s, symbols, params)
        assert np.array_equal(first.samples, second.samples)


class TestSpectralContainment:
    def _band_energy_fraction(self, signal, lo_hz, hi_hz):
        mags = dft_full_magnitudes(signal.samples)
        freqs = np.arange(len(mags)) * signal.sample_rate_hz / len(signal)
        energy = np.square(mags)
        band = (freqs >= lo_hz) & (freqs <= hi_hz)
        return energy[band].sum() / energy.sum()

    @pytest.mark.parametrize("name", ["2ask", "4ask", "2psk", "4psk", "8psk", "16qam"])
    def test_linear_schemes(self, params, scheme, name):
        s = scheme(name)
        signal = modulate(s, generate_symbols(s.order, 14, 3), params)
        guard = 4.0 * params.symbol_rate_hz  # rectangular pulse: rolloff 0
        frac = self._band_energy_fraction(
            signal, params.carrier_hz - guard, params.carrier_hz + guard
        )
        assert frac >= 0.9

    @pytest.mark.parametrize("name", ["2fsk", "4fsk"])
    def test_fsk(self, params, scheme, name):
        s = scheme(name)
        signal = modulate(s, generate_symbols(s.order, 14, 3), params)
        half_band = s.order * params.fsk_tone_spacing_hz + 2.0 * params.symbol_rate_hz
        frac = self._band_energy_fraction(
            signal, params.carrier_hz - half_band, params.carrier_hz + half_band
        )
        assert frac >= 0.9

    @pytest.mark.parametrize("name", ["2psk", "16qam"])
    def test_rrc_pulse(self, scheme, name):
        params = SignalParams(pulse_shape="rrc", rrc_rolloff=0.35)
        s = scheme(name)
        signal = modulate(s, generate_symbols(s.order, 14, 3), params)
        assert len(signal) == 2240
        guard = 4.0 * params.symbol_rate_hz * 1.35
        frac = self._band_energy_fraction(
            signal, params.carrier_hz - guard, params.carrier_hz + guard
        )
        assert frac >= 0.9


class TestRrcFsk:
    def test_rrc_fsk_runs(self, scheme):
        params = SignalParams(pulse_shape="rrc")
        s = scheme("2fsk")
        signal = modulate(s, generate_symbols(2, 14, 3), params)
        assert len(signal) == 2240
        assert np.all(np.isfinite(signal.samples))


class TestInitialPhase:
    def test_phase_offset_applied(self, scheme):
        params = SignalParams(num_symbols=1, initial_phase_rad=np.pi / 3)
        signal = modulate(scheme("2psk"), SymbolSequence(np.array([0]), 2), params)
        t = np.arange(160) / 16000.0
        assert np.allclose(
            signal.samples, np.cos(2 * np.pi * 2000.0 * t + np.pi / 3), atol=1e-12
        )


class TestRealSignal:
    def test_rejects_nan(self):
        with pytest.raises(ConfigurationError):
            RealSignal(np.array([0.0, np.nan]), 16000.0)

    def test_symbol_count_mismatch(self, params, scheme):
        with pytest.raises(ConfigurationError):
            modulate(scheme("2psk"), generate_symbols(2, 10, 0), params)

    def test_order_mismatch(self, params, scheme):
        with pytest.raises(ConfigurationError):
            modulate(scheme("4psk"), generate_symbols(2, 14, 0), params)

"""Passband waveform synthesis for M-ary ASK, FSK, PSK, and 16QAM.

All waveforms are real sampled carriers with unit amplitude (QAM rails
excepted), rectangular symbol pulses by default and an optional
root-raised-cosine pulse for robustness experiments. FSK uses a
switched-oscillator model: each symbol's tone is evaluated at absolute
time, so phase continuity across symbol boundaries is not guaranteed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


class Family(enum.Enum):
    ASK = "ask"
    FSK = "fsk"
    PSK = "psk"
    QAM = "qam"


# Orders the classifier label space admits per family.
_SUPPORTED_ORDERS = {
    Family.ASK: (2, 4),
    Family.FSK: (2, 4),
    Family.PSK: (2, 4, 8),
    Family.QAM: (16,),
}


@dataclass(frozen=True)
class ModulationScheme:
    """A modulation family plus order, e.g. 4PSK or 16QAM."""

    family: Family
    order: int

    def __post_init__(self):
        if self.order < 2 or self.order & (self.order - 1) != 0:
            raise ConfigurationError(
                f"modulation order must be a power of two >= 2, got {self.order}"
            )
        if self.family is Family.QAM:
            root = int(round(self.order ** 0.5))
            if root * root != self.order:
                raise ConfigurationError(
                    f"QAM order must be a perfect square, got {self.order}"
                )
        if self.order not in _SUPPORTED_ORDERS[self.family]:
            raise ConfigurationError(
                f"{self.order}{self.family.value.upper()} is outside the supported label set"
            )

    @property
    def name(self) -> str:
        return f"{self.order}{self.family.value.upper()}"

    @classmethod
    def from_name(cls, name: str) -> "ModulationScheme":
        """Parse names like '2ask', '8PSK', '16qam'."""
        text = name.strip().lower()
        for family in Family:
            if text.endswith(family.value):
                digits = text[: -len(family.value)]
                if digits.isdigit():
                    return cls(family, int(digits))
        raise ConfigurationError(f"unrecognized modulation scheme name: {name!r}")

    def __str__(self) -> str:
        return self.name


def _schemes(*names):
    return tuple(ModulationScheme.from_name(n) for n in names)


# Eight-class and six-class label sets used throughout the experiments.
THETA1 = _schemes("2ask", "2fsk", "2psk", "4ask", "4fsk", "4psk", "8psk", "16qam")
THETA2 = _schemes("2ask", "2fsk", "2psk", "4ask", "4fsk", "4psk")


@dataclass(frozen=True)
class SignalParams:
    """Sampling and carrier parameters of a synthesized passband signal.

    Defaults reproduce the standard experiment setup: 16 kHz sampling,
    2 kHz carrier, 100 baud, 14 symbols (2240 samples per signal).
    """

    sample_rate_hz: float = 16000.0
    carrier_hz: float = 2000.0
    symbol_rate_hz: float = 100.0
    num_symbols: int = 14
    initial_phase_rad: float = 0.0
    pulse_shape: str = "rect"  # "rect" | "rrc"
    rrc_rolloff: float = 0.35
    rrc_span_symbols: int = 8
    fsk_tone_spacing_hz: float = 400.0
    qam_unit_power: bool = False  # scale 16QAM rails to mean power 0.5

    def __post_init__(self):
        if self.sample_rate_hz <= 0 or self.symbol_rate_hz <= 0 or self.carrier_hz <= 0:
            raise ConfigurationError("rates must be positive")
        if self.num_symbols < 1:
            raise ConfigurationError("num_symbols must be >= 1")
        sps = self.sample_rate_hz / self.symbol_rate_hz
        if abs(sps - round(sps)) > 1e-9:
            raise ConfigurationError(
                "sample_rate_hz must be an integer multiple of symbol_rate_hz "
                f"(got sps={sps})"
            )
        if self.pulse_shape not in ("rect", "rrc"):
            raise ConfigurationError(f"unknown pulse shape {self.pulse_shape!r}")
        if not 0.0 < self.rrc_rolloff <= 1.0:
            raise ConfigurationError("rrc_rolloff must be in (0, 1]")
        if self.fsk_tone_spacing_hz <= 0:
            raise ConfigurationError("fsk_tone_spacing_hz must be positive")

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate_hz / self.symbol_rate_hz))

    @property
    def symbol_period_s(self) -> float:
        return 1.0 / self.symbol_rate_hz

    @property
    def num_samples(self) -> int:
        return self.samples_per_symbol * self.num_symbols


@dataclass(frozen=True)
class SymbolSequence:
    """Integer symbols in [0, order)."""

    symbols: np.ndarray
    order: int

    def __post_init__(self):
        arr = np.asarray(self.symbols, dtype=np.int64)
        object.__setattr__(self, "symbols", arr)
        if arr.ndim != 1 or arr.size == 0:
            raise ConfigurationError("symbol sequence must be a nonempty 1-D array")
        if arr.min() < 0 or arr.max() >= self.order:
            raise ConfigurationError(
                f"symbols must lie in [0, {self.order}), got range "
                f"[{arr.min()}, {arr.max()}]"
            )

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class RealSignal:
    """Sampled real-valued passband waveform."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", arr)
        if arr.ndim != 1:
            raise ConfigurationError("signal samples must be 1-D")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("signal contains non-finite samples")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def power(self) -> float:
        """Mean squared amplitude."""
        return float(np.mean(np.square(self.samples)))


def generate_symbols(order: int, count: int, rng) -> SymbolSequence:
    """Draw `count` i.i.d. uniform symbols from {0, ..., order-1}.

    `rng` is an int seed or a numpy Generator; results are deterministic
    for a given seed.
    """
    if order < 2 or order & (order - 1) != 0:
        raise ConfigurationError(f"order must be a power of two >= 2, got {order}")
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(rng)
    return SymbolSequence(rng.integers(0, order, size=count), order)


def _rrc_taps(sps: int, span_symbols: int, rolloff: float) -> np.ndarray:
    """Peak-normalized root-raised-cosine pulse over span_symbols symbols."""
    half = span_symbols * sps // 2
    t = np.arange(-half, half + 1) / sps  # symbol units
    beta = rolloff
    h = np.empty_like(t)
    for i, ti in enumerate(t):
        four_bt = 4.0 * beta * ti
        if abs(ti) < 1e-12:
            h[i] = 1.0 + beta * (4.0 / np.pi - 1.0)
        elif abs(abs(four_bt) - 1.0) < 1e-12:
            h[i] = (beta / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
            )
        else:
            h[i] = (
                np.sin(np.pi * ti * (1.0 - beta))
                + four_bt * np.cos(np.pi * ti * (1.0 + beta))
            ) / (np.pi * ti * (1.0 - four_bt * four_bt))
    return h / h[half]


def _shaped_rail(values: np.ndarray, params: SignalParams) -> np.ndarray:
    """Baseband rail: symbol values through the configured pulse, length L."""
    sps = params.samples_per_symbol
    length = params.num_samples
    if params.pulse_shape == "rect":
        return np.repeat(values.astype(np.float64), sps)
    taps = _rrc_taps(sps, params.rrc_span_symbols, params.rrc_rolloff)
    center = len(taps) // 2
    impulses = np.zeros((len(values) - 1) * sps + 1)
    impulses[::sps] = values
    full = np.convolve(impulses, taps)
    rail = full[center : center + length]
    if len(rail) < length:
        rail = np.pad(rail, (0, length - len(rail)))
    return rail


def _ask_levels(order: int) -> np.ndarray:
    # A_m = m/(M-1): 2ASK is on-off keying.
    return np.arange(order) / (order - 1)


def _qam_rails(order: int) -> np.ndarray:
    # Per-rail levels {2m-1-sqrt(M)}, m = 1..sqrt(M); {-3,-1,1,3} for 16QAM.
    root = int(round(order ** 0.5))
    return 2.0 * np.arange(1, root + 1) - 1.0 - root


def fsk_tone_hz(scheme: ModulationScheme, params: SignalParams, symbol: int) -> float:
    """Tone frequency for one FSK symbol: carrier plus a centered multiple of the spacing."""
    offset = (symbol - (scheme.order - 1) / 2.0) * params.fsk_tone_spacing_hz
    return params.carrier_hz + offset


def _check_nyquist(scheme: ModulationScheme, params: SignalParams):
    if scheme.family is Family.FSK:
        max_offset = (scheme.order - 1) / 2.0 * params.fsk_tone_spacing_hz
        if params.carrier_hz - max_offset <= 0:
            raise ConfigurationError(
                "lowest FSK tone is not positive for "
                f"fc={params.carrier_hz}, spacing={params.fsk_tone_spacing_hz}, M={scheme.order}"
            )
    else:
        max_offset = 0.0
    if params.sample_rate_hz <= 2.0 * (params.carrier_hz + max_offset):
        raise ConfigurationError(
            f"Nyquist violated: fs={params.sample_rate_hz} must exceed "
            f"2*(fc + max offset) = {2.0 * (params.carrier_hz + max_offset)}"
        )


def modulate(
    scheme: ModulationScheme, symbols: SymbolSequence, params: SignalParams
) -> RealSignal:
    """Synthesize the passband waveform for a symbol sequence.

    Mapping rules: ASK amplitude m/(M-1); FSK tone fc + (m-(M-1)/2)*spacing;
    PSK phase 2*pi*m/M; QAM rails {2m-1-sqrt(M)} on the cosine/sine carriers.
    """
    if symbols.order != scheme.order:
        raise ConfigurationError(
            f"symbol order {symbols.order} does not match scheme order {scheme.order}"
        )
    if len(symbols) != params.num_symbols:
        raise ConfigurationError(
            f"expected {params.num_symbols} symbols, got {len(symbols)}"
        )
    _check_nyquist(scheme, params)

    syms = symbols.symbols
    t = np.arange(params.num_samples) / params.sample_rate_hz
    carrier_arg = 2.0 * np.pi * params.carrier_hz * t + params.initial_phase_rad

    if scheme.family is Family.ASK:
        rail = _shaped_rail(_ask_levels(scheme.order)[syms], params)
        wave = rail * np.cos(carrier_arg)
    elif scheme.family is Family.PSK:
        phases = 2.0 * np.pi * syms / scheme.order
        i_rail = _shaped_rail(np.cos(phases), params)
        q_rail = _shaped_rail(np.sin(phases), params)
        wave = i_rail * np.cos(carrier_arg) - q_rail * np.sin(carrier_arg)
    elif scheme.family is Family.QAM:
        levels = _qam_rails(scheme.order)
        root = len(levels)
        a = levels[syms % root]
        b = levels[syms // root]
        if params.qam_unit_power:
            # mean power matches the unit-amplitude carrier convention (0.5)
            scale = 1.0 / np.sqrt(2.0 * np.mean(np.square(levels)))
            a = a * scale
            b = b * scale
        wave = _shaped_rail(a, params) * np.cos(carrier_arg) + _shaped_rail(
            b, params
        ) * np.sin(carrier_arg)
    elif scheme.family is Family.FSK:
        wave = _fsk_wave(scheme, syms, params, t)
    else:  # pragma: no cover
        raise ConfigurationError(f"unhandled family {scheme.family}")

    return RealSignal(wave, params.sample_rate_hz)


def _fsk_wave(scheme, syms, params, t):
    """Switched-oscillator FSK: each symbol's tone at absolute time."""
    sps = params.samples_per_symbol
    tones = np.array([fsk_tone_hz(scheme, params, m) for m in range(scheme.order)])
    if params.pulse_shape == "rect":
        freq = np.repeat(tones[syms], sps)
        return np.cos(2.0 * np.pi * freq * t + params.initial_phase_rad)
    # RRC envelope per symbol, overlap-added at absolute time.
    taps = _rrc_taps(sps, params.rrc_span_symbols, params.rrc_rolloff)
    center = len(taps) // 2
    length = params.num_samples
    wave = np.zeros(length)
    for n, m in enumerate(syms):
        start = n * sps - center
        lo = max(start, 0)
        hi = min(start + len(taps), length)
        if lo >= hi:
            continue
        seg = np.arange(lo, hi)
        wave[seg] += taps[seg - start] * np.cos(
            2.0 * np.pi * tones[m] * t[seg] + params.initial_phase_rad
        )
    return wave

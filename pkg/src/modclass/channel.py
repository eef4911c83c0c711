"""Flat-fading SISO/MIMO channel effects and SNR-calibrated AWGN.

Channels are time-invariant over one observation: each transmit/receive
path applies a gain drawn from [0, 1] and an integer-sample timing offset
within one symbol interval. Noise variance is calibrated per receive
branch against that branch's noiseless power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError
from .sigsynth import ModulationScheme, RealSignal

_MIN_SINGULAR = 1e-3  # rank guard on gain matrices


@dataclass(frozen=True)
class ChannelMatrix:
    """Per-path gains and timing offsets of an nr x nt flat channel."""

    gains: np.ndarray  # (nr, nt), values in [0, 1]
    offsets_s: np.ndarray  # (nr, nt), values in [0, symbol_period_s)
    symbol_period_s: float

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.float64)
        offsets = np.asarray(self.offsets_s, dtype=np.float64)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "offsets_s", offsets)
        if gains.ndim != 2 or gains.shape != offsets.shape:
            raise ConfigurationError("gains and offsets must be equal-shape 2-D arrays")
        nr, nt = gains.shape
        if nr < nt:
            raise ConfigurationError(f"need nr >= nt, got nr={nr}, nt={nt}")
        if gains.min() < 0.0 or gains.max() > 1.0:
            raise ConfigurationError("gains must lie in [0, 1]")
        if offsets.min() < 0.0 or offsets.max() >= self.symbol_period_s:
            raise ConfigurationError("offsets must lie in [0, symbol_period)")

    @property
    def nr(self) -> int:
        return self.gains.shape[0]

    @property
    def nt(self) -> int:
        return self.gains.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    """AWGN variance calibrated for a target SNR against a measured signal power."""

    snr_db: float
    variance: float


@dataclass(frozen=True)
class ReceivedBundle:
    """The nr received branches of one transmission."""

    branches: tuple
    snr_db: float
    truth_label: ModulationScheme | None = None

    def __post_init__(self):
        branches = tuple(self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise ConfigurationError("bundle must contain at least one branch")
        lengths = {len(b) for b in branches}
        if len(lengths) != 1:
            raise ConfigurationError(f"branch lengths differ: {sorted(lengths)}")


def calibrate_noise(signal: RealSignal, snr_db: float) -> NoiseModel:
    """Noise variance that realizes `snr_db` against the signal's measured power."""
    if len(signal) == 0:
        raise ConfigurationError("empty signal")
    power = signal.power
    if np.isinf(snr_db) and snr_db > 0:
        return NoiseModel(snr_db, 0.0)
    if power <= 0.0:
        raise NumericError("zero-power signal: SNR is undefined")
    return NoiseModel(snr_db, power / 10.0 ** (snr_db / 10.0))


def add_awgn(signal: RealSignal, snr_db: float, rng) -> RealSignal:
    """Add white Gaussian noise at the target SNR (snr_db=inf means noise-free)."""
    noise = calibrate_noise(signal, snr_db)
    if noise.variance == 0.0:
        return RealSignal(signal.samples.copy(), signal.sample_rate_hz)
    rng = np.random.default_rng(rng)
    out = signal.samples + rng.normal(0.0, np.sqrt(noise.variance), len(signal))
    return RealSignal(out, signal.sample_rate_hz)


def sample_channel(nt: int, nr: int, symbol_period_s: float, rng) -> ChannelMatrix:
    """Draw a random channel: gains ~ U[0,1], offsets ~ U[0, symbol_period).

    Gain matrices whose smallest singular value falls below 1e-3 are
    rejected and redrawn so the full-column-rank assumption holds.
    """
    if nt < 1 or nr < nt:
        raise ConfigurationError(f"need nr >= nt >= 1, got nt={nt}, nr={nr}")
    if symbol_period_s <= 0:
        raise ConfigurationError("symbol_period_s must be positive")
    rng = np.random.default_rng(rng)
    for _ in range(1000):
        gains = rng.uniform(0.0, 1.0, size=(nr, nt))
        offsets = rng.uniform(0.0, symbol_period_s, size=(nr, nt))
        if np.linalg.svd(gains, compute_uv=False).min() >= _MIN_SINGULAR:
            return ChannelMatrix(gains, offsets, symbol_period_s)
    raise NumericError("could not draw a full-rank gain matrix in 1000 attempts")


def _delayed(x: np.ndarray, delay_samples: int) -> np.ndarray:
    """Shift right by an integer number of samples, zero-filling the start."""
    if delay_samples == 0:
        return x
    out = np.zeros_like(x)
    if delay_samples < len(x):
        out[delay_samples:] = x[: len(x) - delay_samples]
    return out


def mimo_transmit(
    streams,
    ch: ChannelMatrix,
    snr_db: float,
    rng,
    truth_label: ModulationScheme | None = None,
) -> ReceivedBundle:
    """Mix nt transmit streams through the channel and add per-branch AWGN.

    Branch i receives sum_j gain[i,j] * stream_j delayed by the path offset
    (rounded to whole samples), plus noise calibrated to snr_db against the
    branch's own noiseless power. Noise across branches is independent.
    """
    streams = list(streams)
    if len(streams) != ch.nt:
        raise ConfigurationError(
            f"stream count {len(streams)} does not match channel nt={ch.nt}"
        )
    lengths = {len(s) for s in streams}
    rates = {s.sample_rate_hz for s in streams}
    if len(lengths) != 1 or len(rates) != 1:
        raise ConfigurationError("streams must share length and sample rate")
    rate = rates.pop()
    rng = np.random.default_rng(rng)

    delays = np.rint(ch.offsets_s * rate).astype(np.int64)
    branches = []
    for i in range(ch.nr):
        mixed = np.zeros(len(streams[0]))
        for j in range(ch.nt):
            mixed += ch.gains[i, j] * _delayed(streams[j].samples, int(delays[i, j]))
        clean = RealSignal(mixed, rate)
        branches.append(add_awgn(clean, snr_db, rng))
    return ReceivedBundle(tuple(branches), snr_db, truth_label)

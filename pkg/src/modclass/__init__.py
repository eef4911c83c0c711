"""Blind modulation classification from spectrogram images.

Synthesizes M-ary ASK/FSK/PSK/QAM passband signals, passes them through
SISO or MIMO flat-fading channels with calibrated AWGN, renders
windowed-STFT RGB spectrogram images, classifies them with a compact
from-scratch CNN, and fuses per-antenna decisions into a final verdict.
"""

from . import channel, fusion, sigsynth, tfa
from .errors import ConfigurationError, DataError, ModclassError, NumericError
from .sigsynth import THETA1, THETA2, ModulationScheme, RealSignal, SignalParams

__version__ = "0.1.0"

__all__ = [
    "THETA1",
    "THETA2",
    "ConfigurationError",
    "DataError",
    "ModclassError",
    "ModulationScheme",
    "NumericError",
    "RealSignal",
    "SignalParams",
    "channel",
    "fusion",
    "sigsynth",
    "tfa",
]

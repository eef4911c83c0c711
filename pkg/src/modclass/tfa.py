"""Windowed-STFT spectrogram images.

A received waveform becomes a normalized time-frequency matrix (frequency
bins 1..N/2-1 by frames) and then a fixed-size RGB image through a
piecewise-linear jet colormap and either bilinear resizing or
center-crop/zero-pad fitting. The raw tensor interchange format is
"TFA1": magic, u32 height/width/channels (little-endian), then row-major
float32 data.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import ConfigurationError, DataError
from .sigsynth import RealSignal

RAW_MAGIC = b"TFA1"


@dataclass(frozen=True)
class StftConfig:
    """Framing and FFT parameters. Defaults: 320-sample Hamming frames
    overlapping by 315 (step 5), 2048-point FFT."""

    window_len: int = 320
    overlap_len: int = 315
    fft_points: int = 2048
    window_kind: str = "hamming"  # hamming | hanning | blackman

    def __post_init__(self):
        if self.window_len < 2:
            raise ConfigurationError("window_len must be >= 2")
        if not 0 <= self.overlap_len < self.window_len:
            raise ConfigurationError("need 0 <= overlap_len < window_len")
        n = self.fft_points
        if n < self.window_len or n < 2 or n & (n - 1) != 0:
            raise ConfigurationError("fft_points must be a power of two >= window_len")
        if self.window_kind not in ("hamming", "hanning", "blackman"):
            raise ConfigurationError(f"unknown window kind {self.window_kind!r}")

    @property
    def step(self) -> int:
        return self.window_len - self.overlap_len

    @property
    def num_bins(self) -> int:
        """Spectral rows kept per frame: bins 1 .. N/2 - 1 (DC excluded)."""
        return self.fft_points // 2 - 1

    def num_frames(self, signal_len: int) -> int:
        if signal_len < self.window_len:
            raise ConfigurationError(
                f"signal length {signal_len} shorter than window {self.window_len}"
            )
        return (signal_len - self.overlap_len) // self.step


@dataclass(frozen=True)
class SpectrogramMatrix:
    """Normalized spectral magnitudes in [0, 1], frequency rows by time columns."""

    values: np.ndarray
    hz_per_bin: float
    seconds_per_frame: float
    degenerate: bool = False  # set when the raw magnitudes were constant


def make_window(kind: str, window_len: int) -> np.ndarray:
    """Symmetric window weights of the given length.

    The first half is evaluated from the cosine formula and mirrored, so
    w(n) == w(window_len-1-n) holds exactly in floating point.
    """
    if window_len < 2:
        raise ConfigurationError("window_len must be >= 2")
    n = np.arange((window_len + 1) // 2)
    if kind == "hamming":
        half = 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (window_len - 1))
    elif kind == "hanning":
        half = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / (window_len - 1))
    elif kind == "blackman":
        x = 2.0 * np.pi * n / (window_len - 1)
        half = 0.42 - 0.5 * np.cos(x) + 0.08 * np.cos(2.0 * x)
    else:
        raise ConfigurationError(f"unknown window kind {kind!r}")
    out = np.empty(window_len)
    out[: len(half)] = half
    out[window_len - len(half) :] = half[::-1]
    return out


def frame_signal(y, cfg: StftConfig) -> np.ndarray:
    """Split into overlapping windowed frames, shape (num_frames, window_len).

    Frame F holds y[F*step + n] * w(n); a trailing remainder shorter than
    one step is dropped.
    """
    samples = y.samples if isinstance(y, RealSignal) else np.asarray(y, dtype=np.float64)
    n_frames = cfg.num_frames(len(samples))
    window = make_window(cfg.window_kind, cfg.window_len)
    stride = samples.strides[0]
    frames = np.lib.stride_tricks.as_strided(
        samples,
        shape=(n_frames, cfg.window_len),
        strides=(cfg.step * stride, stride),
    )
    return frames * window


def frame_spectrum(frame: np.ndarray, fft_points: int) -> np.ndarray:
    """Spectral magnitudes of one frame at bins 1 .. N/2 - 1 (zero-padded FFT)."""
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) > fft_points:
        raise ConfigurationError(
            f"frame of {len(frame)} samples exceeds fft_points={fft_points}"
        )
    spectrum = scipy.fft.rfft(frame, n=fft_points)
    return np.abs(spectrum[1 : fft_points // 2])


def _magnitude_matrix(frames: np.ndarray, fft_points: int) -> np.ndarray:
    """Batched frame_spectrum: (num_frames, w_s) -> (num_bins, num_frames)."""
    spectra = scipy.fft.rfft(frames, n=fft_points, axis=1)
    return np.abs(spectra[:, 1 : fft_points // 2]).T


def normalize(
    magnitudes: np.ndarray,
    hz_per_bin: float = float("nan"),
    seconds_per_frame: float = float("nan"),
) -> SpectrogramMatrix:
    """Min-max normalize to [0, 1] using the global extrema of the matrix.

    A constant input has no dynamic range; it maps to all zeros with the
    degenerate flag set.
    """
    magnitudes = np.asarray(magnitudes, dtype=np.float64)
    lo = magnitudes.min()
    hi = magnitudes.max()
    if hi == lo:
        return SpectrogramMatrix(
            np.zeros_like(magnitudes), hz_per_bin, seconds_per_frame, degenerate=True
        )
    return SpectrogramMatrix(
        (magnitudes - lo) / (hi - lo), hz_per_bin, seconds_per_frame
    )


def jet_map(values: np.ndarray) -> np.ndarray:
    """Piecewise-linear jet colormap: [0,1] scalars to RGB in [0,1].

    r = clip(min(4v-1.5, -4v+4.5)), g = clip(min(4v-0.5, -4v+3.5)),
    b = clip(min(4v+0.5, -4v+2.5)); 0 maps to dark blue, 1 to dark red.
    """
    v = np.asarray(values)
    if v.size and (v.min() < 0.0 or v.max() > 1.0):
        raise ConfigurationError("jet_map input must lie in [0, 1]")
    v4 = 4.0 * v
    out = np.empty(v.shape + (3,), dtype=np.float64)
    np.minimum(v4 - 1.5, 4.5 - v4, out=out[..., 0])
    np.minimum(v4 - 0.5, 3.5 - v4, out=out[..., 1])
    np.minimum(v4 + 0.5, 2.5 - v4, out=out[..., 2])
    np.clip(out, 0.0, 1.0, out=out)
    return out


def _resize_bilinear(img: np.ndarray, height: int, width: int) -> np.ndarray:
    """Bilinear resampling on pixel centers (half-pixel alignment)."""
    h, w = img.shape[:2]
    ys = (np.arange(height) + 0.5) * (h / height) - 0.5
    xs = (np.arange(width) + 0.5) * (w / width) - 0.5
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(np.int64)
    x0 = np.clip(np.floor(xs), 0, w - 1).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    fx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    top = img[y0][:, x0] * (1.0 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1.0 - fx) + img[y1][:, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def _crop_pad_axis(img: np.ndarray, axis: int, target: int) -> np.ndarray:
    size = img.shape[axis]
    if size > target:  # center crop
        start = (size - target) // 2
        index = [slice(None)] * img.ndim
        index[axis] = slice(start, start + target)
        return img[tuple(index)]
    if size < target:  # centered zero pad
        before = (target - size) // 2
        pad = [(0, 0)] * img.ndim
        pad[axis] = (before, target - size - before)
        return np.pad(img, pad)
    return img


def fit_to_input(img: np.ndarray, target: int, mode: str = "resize") -> np.ndarray:
    """Fit an (H, W, C) image to (target, target, C).

    "resize" bilinearly rescales the whole image; "crop-pad" center-crops
    axes longer than target and zero-pads axes shorter.
    """
    if target < 8:
        raise ConfigurationError(f"target must be >= 8, got {target}")
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., None]
    if img.shape[0] == target and img.shape[1] == target:
        return img
    if mode == "resize":
        return _resize_bilinear(img, target, target)
    if mode == "crop-pad":
        return _crop_pad_axis(_crop_pad_axis(img, 0, target), 1, target)
    raise ConfigurationError(f"unknown fit mode {mode!r}")


def spectrogram_matrix(y: RealSignal, cfg: StftConfig) -> SpectrogramMatrix:
    """Frame, window, transform and normalize a waveform into G."""
    frames = frame_signal(y, cfg)
    magnitudes = _magnitude_matrix(frames, cfg.fft_points)
    return normalize(
        magnitudes,
        hz_per_bin=y.sample_rate_hz / cfg.fft_points,
        seconds_per_frame=cfg.step / y.sample_rate_hz,
    )


def spectrogram(
    y: RealSignal,
    cfg: StftConfig,
    target: int,
    mode: str = "resize",
    grayscale: bool = False,
) -> np.ndarray:
    """Full pipeline: waveform to a (target, target, 3) RGB image in [0, 1].

    With grayscale=True the colormap step is skipped and a single-channel
    (target, target, 1) image is returned.
    """
    g = spectrogram_matrix(y, cfg)
    img = g.values[..., None] if grayscale else jet_map(g.values)
    return fit_to_input(img, target, mode)


def write_raw_tensor(path, img: np.ndarray) -> None:
    """Write an image as a TFA1 little-endian float32 tensor file."""
    img = np.asarray(img)
    if img.ndim == 2:
        img = img[..., None]
    if img.ndim != 3:
        raise ConfigurationError(f"expected 2-D or 3-D image, got shape {img.shape}")
    h, w, c = img.shape
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(struct.pack("<III", h, w, c))
        fh.write(np.ascontiguousarray(img, dtype="<f4").tobytes())


def read_raw_tensor(path) -> np.ndarray:
    """Read a TFA1 tensor file back as a float32 (H, W, C) array."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != RAW_MAGIC:
            raise DataError(f"{path}: bad magic {head!r} at byte 0")
        dims = fh.read(12)
        if len(dims) != 12:
            raise DataError(f"{path}: truncated header at byte {4 + len(dims)}")
        h, w, c = struct.unpack("<III", dims)
        payload = fh.read(h * w * c * 4)
        if len(payload) != h * w * c * 4:
            raise DataError(f"{path}: truncated payload at byte {16 + len(payload)}")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w, c).astype(np.float32)


def write_png(path, img: np.ndarray) -> None:
    """Write a [0, 1] float image as an 8-bit PNG (RGB or grayscale)."""
    from PIL import Image

    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[..., 0]
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data).save(path)


def write_signal_f32(path, signal: RealSignal, sidecar: dict | None = None) -> None:
    """Export a waveform as raw little-endian float32 plus a JSON sidecar."""
    np.ascontiguousarray(signal.samples, dtype="<f4").tofile(path)
    meta = {"sample_rate_hz": signal.sample_rate_hz}
    if sidecar:
        meta.update(sidecar)
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_signal_f32(path, sample_rate_hz: float | None = None) -> RealSignal:
    """Read a raw float32 waveform; sample rate comes from the sidecar unless given."""
    if sample_rate_hz is None:
        sidecar = str(path) + ".json"
        try:
            with open(sidecar) as fh:
                meta = json.load(fh)
            sample_rate_hz = float(meta["sample_rate_hz"])
        except (OSError, KeyError, ValueError) as exc:
            raise DataError(
                f"cannot determine sample rate for {path}: provide it or a sidecar ({exc})"
            ) from exc
    samples = np.fromfile(path, dtype="<f4").astype(np.float64)
    if samples.size == 0:
        raise DataError(f"{path}: empty waveform file")
    return RealSignal(samples, sample_rate_hz)

"""Network layers with explicit forward/backward passes.

Every layer exposes `forward(x, train, rng) -> (out, cache)` and
`backward(dout, cache) -> (dx, grads)` where `grads` aligns one-to-one
with `params()`. Images flow as (batch, height, width, channels) arrays;
convolutions are stride-1 with zero padding that preserves spatial size.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


def he_init(rng, shape, fan_in, dtype):
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


class Layer:
    def params(self):
        return []

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dout, cache):
        raise NotImplementedError

    def output_shape(self, input_shape):
        raise NotImplementedError


class Conv2D(Layer):
    """Stride-1 same-padding convolution, computed via im2col matmuls.

    im2col copies one kernel row at a time: for a fixed vertical tap the
    (horizontal tap, channel) block is a contiguous run of the padded
    input row, so the gather moves k*C-float chunks instead of pixels.
    Setting `skip_input_grad` (first layer of a network) elides the
    unused input-gradient scatter in backward.
    """

    def __init__(self, in_channels, out_channels, kernel_size=3, rng=None, dtype=np.float32):
        if kernel_size % 2 != 1:
            raise ConfigurationError("kernel_size must be odd for same padding")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.skip_input_grad = False
        fan_in = kernel_size * kernel_size * in_channels
        rng = np.random.default_rng(rng)
        self.w = he_init(rng, (kernel_size, kernel_size, in_channels, out_channels), fan_in, dtype)
        self.b = np.zeros(out_channels, dtype=dtype)

    def params(self):
        return [self.w, self.b]

    def _im2col(self, x):
        b, h, w, c = x.shape
        k = self.kernel_size
        pad = k // 2
        padded = np.zeros((b, h + 2 * pad, w + 2 * pad, c), dtype=x.dtype)
        padded[:, pad : pad + h, pad : pad + w, :] = x
        rows = padded.reshape(b, h + 2 * pad, (w + 2 * pad) * c)
        cols = np.empty((b, h, w, k * k * c), dtype=x.dtype)
        for i in range(k):
            # all horizontal taps of kernel row i, as sliding windows of k*c
            windows = np.lib.stride_tricks.sliding_window_view(
                rows[:, i : i + h], k * c, axis=2
            )
            cols[..., i * k * c : (i + 1) * k * c] = windows[:, :, ::c][:, :, :w]
        return cols.reshape(b * h * w, k * k * c)

    def forward(self, x, train=False, rng=None):
        b, h, w, c = x.shape
        if c != self.in_channels:
            raise ConfigurationError(
                f"conv expected {self.in_channels} input channels, got {c}"
            )
        k = self.kernel_size
        cols = self._im2col(x)
        out = cols @ self.w.reshape(k * k * c, self.out_channels) + self.b
        return out.reshape(b, h, w, self.out_channels), (x.shape, cols)

    def backward(self, dout, cache):
        (b, h, w, c), cols = cache
        k = self.kernel_size
        pad = k // 2
        flat = dout.reshape(b * h * w, self.out_channels)
        dw = (cols.T @ flat).reshape(self.w.shape)
        db = flat.sum(axis=0)
        if self.skip_input_grad:
            return None, [dw, db]
        dcols = (flat @ self.w.reshape(k * k * c, self.out_channels).T).reshape(
            b, h, w, k * k * c
        )
        dx_padded = np.zeros((b, h + 2 * pad, w + 2 * pad, c), dtype=dout.dtype)
        for i in range(k):
            for j in range(k):
                tap = (i * k + j) * c
                dx_padded[:, i : i + h, j : j + w, :] += dcols[..., tap : tap + c]
        dx = dx_padded[:, pad : pad + h, pad : pad + w, :]
        return np.ascontiguousarray(dx), [dw, db]

    def output_shape(self, input_shape):
        h, w, c = input_shape
        if c != self.in_channels:
            raise ConfigurationError(
                f"conv expected {self.in_channels} channels, shape chain gives {c}"
            )
        return (h, w, self.out_channels)


class ReLU(Layer):
    def forward(self, x, train=False, rng=None):
        return np.maximum(x, 0), x > 0

    def backward(self, dout, cache):
        return dout * cache, []

    def output_shape(self, input_shape):
        return input_shape


class MaxPool2(Layer):
    """2x2 max pooling with stride 2; ties route gradient to the first
    window position (row-major within the window)."""

    @staticmethod
    def _quadrants(x):
        return (
            x[:, 0::2, 0::2, :],
            x[:, 0::2, 1::2, :],
            x[:, 1::2, 0::2, :],
            x[:, 1::2, 1::2, :],
        )

    def forward(self, x, train=False, rng=None):
        b, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ConfigurationError(f"maxpool needs even spatial dims, got {h}x{w}")
        out = np.maximum.reduce(self._quadrants(x))
        return out, (x, out)

    def backward(self, dout, cache):
        x, out = cache
        dx = np.zeros_like(x)
        routed = np.zeros(out.shape, dtype=bool)
        for quadrant, target in zip(self._quadrants(x), self._quadrants(dx)):
            hit = (quadrant == out) & ~routed
            np.copyto(target, dout, where=hit)
            routed |= hit
        return dx, []

    def output_shape(self, input_shape):
        h, w, c = input_shape
        if h % 2 or w % 2:
            raise ConfigurationError(f"maxpool needs even spatial dims, got {h}x{w}")
        return (h // 2, w // 2, c)


class Flatten(Layer):
    def forward(self, x, train=False, rng=None):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dout, cache):
        return dout.reshape(cache), []

    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)


class Dense(Layer):
    def __init__(self, in_features, out_features, rng=None, dtype=np.float32):
        self.in_features = in_features
        self.out_features = out_features
        rng = np.random.default_rng(rng)
        self.w = he_init(rng, (in_features, out_features), in_features, dtype)
        self.b = np.zeros(out_features, dtype=dtype)

    def params(self):
        return [self.w, self.b]

    def forward(self, x, train=False, rng=None):
        if x.shape[1] != self.in_features:
            raise ConfigurationError(
                f"dense expected {self.in_features} features, got {x.shape[1]}"
            )
        return x @ self.w + self.b, x

    def backward(self, dout, cache):
        dw = cache.T @ dout
        db = dout.sum(axis=0)
        return dout @ self.w.T, [dw, db]

    def output_shape(self, input_shape):
        if input_shape != (self.in_features,):
            raise ConfigurationError(
                f"dense expected ({self.in_features},), shape chain gives {input_shape}"
            )
        return (self.out_features,)


class Dropout(Layer):
    """Inverted dropout: active only in training mode."""

    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise ConfigurationError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x, None
        if rng is None:
            raise ConfigurationError("training-mode dropout needs an rng")
        keep = 1.0 - self.rate
        mask = (rng.random(x.shape) >= self.rate).astype(x.dtype) / keep
        return x * mask, mask

    def backward(self, dout, cache):
        if cache is None:
            return dout, []
        return dout * cache, []

    def output_shape(self, input_shape):
        return input_shape

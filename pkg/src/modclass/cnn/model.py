"""Compact convolutional classifier: model assembly, inference, and loss.

The default stack is three conv/relu/maxpool blocks (16, 32, 64 filters),
a 128-unit dense layer with dropout, and a K-way softmax head. Weights
are float32 for training speed; float64 is used for gradient checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .layers import Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2, ReLU


@dataclass(frozen=True)
class DecisionVector:
    """K-way class probabilities for one input."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", arr)
        if arr.ndim != 1 or arr.size < 2:
            raise ConfigurationError("decision vector must be 1-D with >= 2 entries")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0:
            raise ConfigurationError("probabilities must be finite and nonnegative")
        if abs(arr.sum() - 1.0) > 1e-6:
            raise ConfigurationError(f"probabilities sum to {arr.sum()}, expected 1")

    def __len__(self) -> int:
        return len(self.probs)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for numerical stability."""
    logits = np.asarray(logits)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class CnnModel:
    """An ordered layer stack with a softmax head."""

    def __init__(self, layers, input_shape, num_classes, dtype=np.float32):
        self.layers: list[Layer] = list(layers)
        self.input_shape = tuple(input_shape)
        self.num_classes = int(num_classes)
        self.dtype = np.dtype(dtype)
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
        if shape != (self.num_classes,):
            raise ConfigurationError(
                f"layer chain produces {shape}, expected ({self.num_classes},)"
            )
        if self.layers and isinstance(self.layers[0], Conv2D):
            # nothing consumes the input gradient of the first layer
            self.layers[0].skip_input_grad = True

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def forward_logits(self, x, train=False, rng=None):
        """Run the stack; returns (logits, caches) with caches for backward."""
        x = np.ascontiguousarray(x, dtype=self.dtype)
        if x.ndim == 3:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise ConfigurationError(
                f"input shape {x.shape[1:]} does not match model {self.input_shape}"
            )
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, train=train, rng=rng)
            caches.append(cache)
        return x, caches

    def predict_probs(self, images, batch_size: int = 128) -> np.ndarray:
        """Inference-mode probabilities for a batch, shape (n, K)."""
        images = np.asarray(images)
        if images.ndim == 3:
            images = images[None]
        chunks = []
        for start in range(0, len(images), batch_size):
            logits, _ = self.forward_logits(images[start : start + batch_size])
            chunks.append(softmax(logits))
        return np.concatenate(chunks, axis=0)


def build_model(
    input_shape,
    num_classes: int,
    seed: int,
    dropout_rate: float = 0.5,
    dtype=np.float32,
) -> CnnModel:
    """Assemble the default three-block CNN with He-initialized weights."""
    h, w, c = input_shape
    if h < 32 or w < 32:
        raise ConfigurationError(f"input spatial dims must be >= 32, got {h}x{w}")
    if num_classes < 2:
        raise ConfigurationError(f"need at least 2 classes, got {num_classes}")
    root = np.random.SeedSequence(seed)
    children = [np.random.default_rng(s) for s in root.spawn(5)]
    flat = (h // 8) * (w // 8) * 64
    layers = [
        Conv2D(c, 16, 3, rng=children[0], dtype=dtype),
        ReLU(),
        MaxPool2(),
        Conv2D(16, 32, 3, rng=children[1], dtype=dtype),
        ReLU(),
        MaxPool2(),
        Conv2D(32, 64, 3, rng=children[2], dtype=dtype),
        ReLU(),
        MaxPool2(),
        Flatten(),
        Dense(flat, 128, rng=children[3], dtype=dtype),
        ReLU(),
        Dropout(dropout_rate),
        Dense(128, num_classes, rng=children[4], dtype=dtype),
    ]
    return CnnModel(layers, input_shape, num_classes, dtype=dtype)


def forward(model: CnnModel, image: np.ndarray) -> DecisionVector:
    """Inference-mode decision vector for a single image."""
    image = np.asarray(image)
    if image.shape != model.input_shape:
        raise ConfigurationError(
            f"image shape {image.shape} does not match model {model.input_shape}"
        )
    logits, _ = model.forward_logits(image[None])
    return DecisionVector(softmax(logits)[0])


def loss_and_grads(model: CnnModel, images, labels, rng=None):
    """Mean cross-entropy over a batch plus gradients for every parameter.

    Runs the stack in training mode (dropout active when an rng is given).
    Returns (loss, grads) with grads aligned to model.params().
    """
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim == 3:
        images = images[None]
    if labels.ndim == 0:
        labels = labels[None]
    if len(images) == 0:
        raise ConfigurationError("empty batch")
    if len(images) != len(labels):
        raise ConfigurationError("batch and label counts differ")
    if labels.min() < 0 or labels.max() >= model.num_classes:
        raise ConfigurationError(
            f"labels must lie in [0, {model.num_classes}), got "
            f"[{labels.min()}, {labels.max()}]"
        )

    logits, caches = model.forward_logits(images, train=True, rng=rng)
    probs = softmax(logits.astype(np.float64))
    n = len(images)
    eps = np.finfo(np.float64).tiny
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + eps)))

    dlogits = probs
    dlogits[np.arange(n), labels] -= 1.0
    dlogits = (dlogits / n).astype(model.dtype)

    grads = [None] * len(model.params())
    pos = len(grads)
    dout = dlogits
    for layer, cache in zip(reversed(model.layers), reversed(caches)):
        dout, layer_grads = layer.backward(dout, cache)
        pos -= len(layer_grads)
        grads[pos : pos + len(layer_grads)] = layer_grads
    return loss, grads

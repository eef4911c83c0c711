"""Model file format "CNN1": layer descriptors plus little-endian float32 weights.

Layout: magic "CNN1", u32 version, u32 H/W/C/K, u32 layer count, then one
record per layer (u32 type code + type-specific fields and weights). All
integers are little-endian u32; weights are row-major float32.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import DataError
from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2, ReLU
from .model import CnnModel

MAGIC = b"CNN1"
VERSION = 1

_CONV, _RELU, _MAXPOOL, _FLATTEN, _DENSE, _DROPOUT = range(1, 7)


def save_model(model: CnnModel, path) -> None:
    """Write the model; float64 models are stored at float32 precision."""
    h, w, c = model.input_shape
    parts = [MAGIC, struct.pack("<5I", VERSION, h, w, c, model.num_classes)]
    parts.append(struct.pack("<I", len(model.layers)))
    for layer in model.layers:
        if isinstance(layer, Conv2D):
            parts.append(
                struct.pack(
                    "<4I", _CONV, layer.in_channels, layer.out_channels, layer.kernel_size
                )
            )
            parts.append(np.ascontiguousarray(layer.w, dtype="<f4").tobytes())
            parts.append(np.ascontiguousarray(layer.b, dtype="<f4").tobytes())
        elif isinstance(layer, ReLU):
            parts.append(struct.pack("<I", _RELU))
        elif isinstance(layer, MaxPool2):
            parts.append(struct.pack("<I", _MAXPOOL))
        elif isinstance(layer, Flatten):
            parts.append(struct.pack("<I", _FLATTEN))
        elif isinstance(layer, Dense):
            parts.append(struct.pack("<3I", _DENSE, layer.in_features, layer.out_features))
            parts.append(np.ascontiguousarray(layer.w, dtype="<f4").tobytes())
            parts.append(np.ascontiguousarray(layer.b, dtype="<f4").tobytes())
        elif isinstance(layer, Dropout):
            parts.append(struct.pack("<If", _DROPOUT, layer.rate))
        else:
            raise DataError(f"cannot serialize layer type {type(layer).__name__}")
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise DataError(
                f"{self.path}: truncated file, needed {count} bytes at offset {self.pos}"
            )
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def u32(self, n=1):
        vals = struct.unpack(f"<{n}I", self.take(4 * n))
        return vals[0] if n == 1 else vals

    def f32(self):
        return struct.unpack("<f", self.take(4))[0]

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float32)


def load_model(path) -> CnnModel:
    with open(path, "rb") as fh:
        reader = _Reader(fh.read(), path)
    if reader.take(4) != MAGIC:
        raise DataError(f"{path}: bad magic at offset 0")
    version = reader.u32()
    if version != VERSION:
        raise DataError(f"{path}: unsupported model format version {version}")
    h, w, c, k = reader.u32(4)
    n_layers = reader.u32()
    layers = []
    for _ in range(n_layers):
        code = reader.u32()
        if code == _CONV:
            in_c, out_c, ksize = reader.u32(3)
            layer = Conv2D(in_c, out_c, ksize, rng=0)
            layer.w = reader.array((ksize, ksize, in_c, out_c))
            layer.b = reader.array((out_c,))
            layers.append(layer)
        elif code == _RELU:
            layers.append(ReLU())
        elif code == _MAXPOOL:
            layers.append(MaxPool2())
        elif code == _FLATTEN:
            layers.append(Flatten())
        elif code == _DENSE:
            in_f, out_f = reader.u32(2)
            layer = Dense(in_f, out_f, rng=0)
            layer.w = reader.array((in_f, out_f))
            layer.b = reader.array((out_f,))
            layers.append(layer)
        elif code == _DROPOUT:
            layers.append(Dropout(reader.f32()))
        else:
            raise DataError(
                f"{path}: unknown layer code {code} at offset {reader.pos - 4}"
            )
    if reader.pos != len(reader.data):
        raise DataError(
            f"{path}: {len(reader.data) - reader.pos} trailing bytes at offset {reader.pos}"
        )
    return CnnModel(layers, (h, w, c), k, dtype=np.float32)

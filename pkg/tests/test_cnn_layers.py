"""Finite-difference gradient checks for every layer type in isolation."""

import numpy as np
import pytest

from modclass.cnn.layers import Conv2D, Dense, Dropout, Flatten, MaxPool2, ReLU
from modclass.errors import ConfigurationError
from oracles import central_difference_grad, relative_error

EPS = 1e-4
TOL = 1e-4


def _scalarize(layer, x, weight_seed=7, train=False, rng_factory=None):
    """Deterministic scalar loss: sum(forward(x) * R) with fixed random R."""
    rng = np.random.default_rng(weight_seed)
    out, _ = layer.forward(
        x, train=train, rng=rng_factory() if rng_factory else None
    )
    r = np.random.default_rng(99).standard_normal(out.shape)

    def f(xx):
        o, _ = layer.forward(
            xx, train=train, rng=rng_factory() if rng_factory else None
        )
        return float(np.sum(o * r))

    out2, cache = layer.forward(
        x, train=train, rng=rng_factory() if rng_factory else None
    )
    dx, grads = layer.backward(r.astype(out2.dtype), cache)
    return f, dx, grads


class TestConvGradients:
    @pytest.fixture
    def setup(self):
        layer = Conv2D(3, 4, 3, rng=5, dtype=np.float64)
        x = np.random.default_rng(1).standard_normal((2, 6, 5, 3))
        return layer, x

    def test_input_gradient(self, setup):
        layer, x = setup
        f, dx, _ = _scalarize(layer, x)
        fd = central_difference_grad(f, x, EPS)
        assert relative_error(dx, fd) < TOL

    def test_weight_gradient(self, setup):
        layer, x = setup
        f, _, grads = _scalarize(layer, x)

        def f_w(w):
            old = layer.w
            layer.w = w
            try:
                out, _ = layer.forward(x)
                return float(np.sum(out * np.random.default_rng(99).standard_normal(out.shape)))
            finally:
                layer.w = old

        fd = central_difference_grad(f_w, layer.w.copy(), EPS)
        assert relative_error(grads[0], fd) < TOL

    def test_bias_gradient(self, setup):
        layer, x = setup
        f, _, grads = _scalarize(layer, x)

        def f_b(b):
            old = layer.b
            layer.b = b
            try:
                out, _ = layer.forward(x)
                return float(np.sum(out * np.random.default_rng(99).standard_normal(out.shape)))
            finally:
                layer.b = old

        fd = central_difference_grad(f_b, layer.b.copy(), EPS)
        assert relative_error(grads[1], fd) < TOL

    def test_skip_input_grad_returns_none(self, setup):
        layer, x = setup
        layer.skip_input_grad = True
        out, cache = layer.forward(x)
        dx, grads = layer.backward(np.ones_like(out), cache)
        assert dx is None
        assert len(grads) == 2


class TestDenseGradients:
    def test_all_gradients(self):
        layer = Dense(7, 3, rng=5, dtype=np.float64)
        x = np.random.default_rng(2).standard_normal((4, 7))
        f, dx, grads = _scalarize(layer, x)
        assert relative_error(dx, central_difference_grad(f, x, EPS)) < TOL

        r = np.random.default_rng(99).standard_normal((4, 3))

        def f_w(w):
            return float(np.sum((x @ w + layer.b) * r))

        def f_b(b):
            return float(np.sum((x @ layer.w + b) * r))

        assert relative_error(grads[0], central_difference_grad(f_w, layer.w.copy(), EPS)) < TOL
        assert relative_error(grads[1], central_difference_grad(f_b, layer.b.copy(), EPS)) < TOL


class TestReluGradient:
    def test_input_gradient(self):
        layer = ReLU()
        # keep values away from the kink at zero
        x = np.random.default_rng(3).standard_normal((5, 9))
        x = np.where(np.abs(x) < 0.05, 0.5, x)
        f, dx, _ = _scalarize(layer, x)
        assert relative_error(dx, central_difference_grad(f, x, EPS)) < TOL


class TestMaxPoolGradient:
    def test_input_gradient(self):
        layer = MaxPool2()
        x = np.random.default_rng(4).standard_normal((2, 4, 6, 3))
        f, dx, _ = _scalarize(layer, x)
        assert relative_error(dx, central_difference_grad(f, x, EPS)) < TOL

    def test_tie_routes_once(self):
        layer = MaxPool2()
        x = np.full((1, 2, 2, 1), 3.0)
        out, cache = layer.forward(x)
        dx, _ = layer.backward(np.array(5.0).reshape(1, 1, 1, 1), cache)
        assert out[0, 0, 0, 0] == 3.0
        assert dx.sum() == 5.0  # gradient mass preserved, not duplicated
        assert np.count_nonzero(dx) == 1

    def test_odd_dims_rejected(self):
        with pytest.raises(ConfigurationError):
            MaxPool2().forward(np.zeros((1, 3, 4, 1)))


class TestDropoutGradient:
    def test_input_gradient_with_frozen_mask(self):
        layer = Dropout(0.4)
        x = np.random.default_rng(5).standard_normal((6, 8)) + 3.0

        def rng_factory():
            return np.random.default_rng(1234)  # same mask for every evaluation

        f, dx, _ = _scalarize(layer, x, train=True, rng_factory=rng_factory)
        assert relative_error(dx, central_difference_grad(f, x, EPS)) < TOL

    def test_inference_identity(self):
        layer = Dropout(0.9)
        x = np.random.default_rng(6).standard_normal((3, 3))
        out, _ = layer.forward(x, train=False)
        assert np.array_equal(out, x)

    def test_training_needs_rng(self):
        with pytest.raises(ConfigurationError):
            Dropout(0.5).forward(np.zeros((2, 2)), train=True)

    def test_invalid_rate(self):
        with pytest.raises(ConfigurationError):
            Dropout(1.0)


class TestFlatten:
    def test_round_trip(self):
        layer = Flatten()
        x = np.random.default_rng(7).standard_normal((3, 4, 5, 2))
        out, cache = layer.forward(x)
        assert out.shape == (3, 40)
        dx, _ = layer.backward(out, cache)
        assert np.array_equal(dx, x)

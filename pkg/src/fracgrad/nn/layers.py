"""Small-CNN building blocks on float64 numpy arrays, channels-last.

Every layer's forward returns (output, cache) and its backward takes
(upstream gradient, cache) and returns (input gradient, parameter gradients
or None).  Caches are explicit values, not hidden state, so a layer instance
can serve several concurrent forward/backward chains.  Interlayer gradient
flow here is ordinary first-order backprop; anything fractional happens
later, in how parameter updates consume these gradients.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

KERNEL = 3  # conv kernels are 3x3, stride 1, same padding


def _as_f64(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


class Layer:
    kind: str = "base"
    has_params: bool = False

    def forward(self, x: np.ndarray):
        raise NotImplementedError

    def backward(self, dy: np.ndarray, cache):
        raise NotImplementedError

    def param_names(self) -> tuple[str, ...]:
        return ()


class Dense(Layer):
    """Affine map on feature vectors: y = x @ weights + bias."""

    kind = "dense"
    has_params = True

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.in_features = int(in_features)
        self.out_features = int(out_features)
        self.weights = rng.uniform(-0.1, 0.1, size=(self.in_features, self.out_features))
        self.bias = rng.uniform(-0.1, 0.1, size=(self.out_features,))

    def param_names(self) -> tuple[str, ...]:
        return ("weights", "bias")

    def forward(self, x: np.ndarray):
        x = _as_f64(x)
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ValueError(
                f"dense expects (N, {self.in_features}), got {x.shape}"
            )
        return x @ self.weights + self.bias, {"x": x}

    def backward(self, dy: np.ndarray, cache):
        x = cache["x"]
        dy = _as_f64(dy)
        grads = {"weights": x.T @ dy, "bias": dy.sum(axis=0)}
        return dy @ self.weights.T, grads


class Conv2D(Layer):
    """3x3 convolution, stride 1, zero-padded to keep spatial size."""

    kind = "conv2d"
    has_params = True

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator):
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.weights = rng.uniform(
            -0.1, 0.1, size=(KERNEL, KERNEL, self.in_channels, self.out_channels)
        )
        self.bias = rng.uniform(-0.1, 0.1, size=(self.out_channels,))

    def param_names(self) -> tuple[str, ...]:
        return ("weights", "bias")

    def forward(self, x: np.ndarray):
        x = _as_f64(x)
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ValueError(
                f"conv2d expects (N, H, W, {self.in_channels}), got {x.shape}"
            )
        n, h, w, _ = x.shape
        xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
        y = np.zeros((n, h, w, self.out_channels)) + self.bias
        for di in range(KERNEL):
            for dj in range(KERNEL):
                y += xp[:, di : di + h, dj : dj + w, :] @ self.weights[di, dj]
        return y, {"x_padded": xp, "in_shape": x.shape}

    def backward(self, dy: np.ndarray, cache):
        dy = _as_f64(dy)
        xp = cache["x_padded"]
        _, h, w, _ = cache["in_shape"]
        dw = np.zeros_like(self.weights)
        db = dy.sum(axis=(0, 1, 2))
        dxp = np.zeros_like(xp)
        for di in range(KERNEL):
            for dj in range(KERNEL):
                patch = xp[:, di : di + h, dj : dj + w, :]
                dw[di, dj] = np.tensordot(patch, dy, axes=([0, 1, 2], [0, 1, 2]))
                dxp[:, di : di + h, dj : dj + w, :] += dy @ self.weights[di, dj].T
        return dxp[:, 1 : h + 1, 1 : w + 1, :], {"weights": dw, "bias": db}


class MaxPool2x2(Layer):
    """2x2 max pooling with stride 2; ties resolve to the first position."""

    kind = "maxpool2x2"

    def forward(self, x: np.ndarray):
        x = _as_f64(x)
        if x.ndim != 4:
            raise ValueError(f"maxpool2x2 expects (N, H, W, C), got {x.shape}")
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"maxpool2x2 needs even spatial dims, got {h}x{w}")
        windows = (
            x.reshape(n, h // 2, 2, w // 2, 2, c)
            .transpose(0, 1, 3, 5, 2, 4)
            .reshape(n, h // 2, w // 2, c, 4)
        )
        idx = windows.argmax(axis=-1)
        y = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
        return y, {"idx": idx, "in_shape": x.shape}

    def backward(self, dy: np.ndarray, cache):
        dy = _as_f64(dy)
        n, h, w, c = cache["in_shape"]
        scattered = np.zeros((n, h // 2, w // 2, c, 4))
        np.put_along_axis(scattered, cache["idx"][..., None], dy[..., None], axis=-1)
        dx = (
            scattered.reshape(n, h // 2, w // 2, c, 2, 2)
            .transpose(0, 1, 4, 2, 5, 3)
            .reshape(n, h, w, c)
        )
        return dx, None


class ReLU(Layer):
    """Elementwise max(x, 0); the subgradient at 0 is taken as 0."""

    kind = "relu"

    def forward(self, x: np.ndarray):
        x = _as_f64(x)
        return np.maximum(x, 0.0), {"mask": x > 0.0}

    def backward(self, dy: np.ndarray, cache):
        return _as_f64(dy) * cache["mask"], None


class Sigmoid(Layer):
    """Elementwise logistic activation."""

    kind = "sigmoid"

    def forward(self, x: np.ndarray):
        y = expit(_as_f64(x))
        return y, {"y": y}

    def backward(self, dy: np.ndarray, cache):
        y = cache["y"]
        return _as_f64(dy) * y * (1.0 - y), None


class Flatten(Layer):
    """Collapse all but the batch axis."""

    kind = "flatten"

    def forward(self, x: np.ndarray):
        x = _as_f64(x)
        if x.ndim < 2:
            raise ValueError(f"flatten expects a batch dimension, got shape {x.shape}")
        return x.reshape(x.shape[0], -1), {"in_shape": x.shape}

    def backward(self, dy: np.ndarray, cache):
        return _as_f64(dy).reshape(cache["in_shape"]), None

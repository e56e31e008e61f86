"""Sequential network container, toy-CNN builders, and the training loss.

The classifier head produces raw per-class scores; the logistic squashing
lives inside the loss and inside probability readouts.  Fusing the sigmoid
with the loss keeps the score gradient in the closed form -t (1 - sig(s)) / m
instead of dividing by sig(s) first and multiplying it back, which is both
faster and safe when a score saturates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2x2, ReLU, Sigmoid

_LOG_CLIP = 1e-12


class Network:
    """An ordered stack of layers applied left to right."""

    def __init__(self, layers: list[Layer]):
        self.layers = list(layers)
        self.architecture: "NetworkArchitecture | None" = None

    def forward(self, x: np.ndarray):
        """Run all layers; returns (output, list of per-layer caches)."""
        caches = []
        out = x
        for i, layer in enumerate(self.layers):
            try:
                out, cache = layer.forward(out)
            except ValueError as e:
                raise ValueError(f"layer {i} ({layer.kind}): {e}") from e
            caches.append(cache)
        return out, caches

    def backward(self, caches: list, dout: np.ndarray):
        """Chain-rule pass right to left.

        Returns a list aligned with self.layers: a dict of parameter
        gradients for layers that have parameters, None for the rest.  The
        pass itself is plain first-order backprop and takes no optimizer
        settings, so its output depends only on parameters, inputs, and the
        loss gradient.
        """
        if len(caches) != len(self.layers):
            raise ValueError(
                f"got {len(caches)} caches for {len(self.layers)} layers"
            )
        grads: list[dict | None] = [None] * len(self.layers)
        d = dout
        for i in range(len(self.layers) - 1, -1, -1):
            d, g = self.layers[i].backward(d, caches[i])
            grads[i] = g
        return grads

    def parameters(self) -> list[tuple[int, str]]:
        """(layer index, attribute name) for every trainable tensor, in order."""
        refs = []
        for i, layer in enumerate(self.layers):
            for name in layer.param_names():
                refs.append((i, name))
        return refs

    def get_param(self, ref: tuple[int, str]) -> np.ndarray:
        i, name = ref
        return getattr(self.layers[i], name)

    def set_param(self, ref: tuple[int, str], value: np.ndarray) -> None:
        i, name = ref
        setattr(self.layers[i], name, value)

    def n_parameters(self) -> int:
        return sum(self.get_param(r).size for r in self.parameters())


@dataclass(frozen=True)
class NetworkArchitecture:
    """Everything needed to rebuild a network skeleton."""

    image_size: int = 16
    in_channels: int = 1
    conv_channels: tuple[int, ...] = (8, 16)
    hidden_units: int = 32
    n_classes: int = 2
    include_output_sigmoid: bool = False

    def to_dict(self) -> dict:
        return {
            "image_size": self.image_size,
            "in_channels": self.in_channels,
            "conv_channels": list(self.conv_channels),
            "hidden_units": self.hidden_units,
            "n_classes": self.n_classes,
            "include_output_sigmoid": self.include_output_sigmoid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkArchitecture":
        return cls(
            image_size=int(d["image_size"]),
            in_channels=int(d["in_channels"]),
            conv_channels=tuple(int(c) for c in d["conv_channels"]),
            hidden_units=int(d["hidden_units"]),
            n_classes=int(d["n_classes"]),
            include_output_sigmoid=bool(d["include_output_sigmoid"]),
        )


def build_network(arch: NetworkArchitecture, rng: np.random.Generator) -> Network:
    """Construct the VGG-style stack: repeated conv/relu/pool blocks, then a
    hidden dense layer and a scoring layer.

    Weights and biases draw from uniform [-0.1, 0.1] in construction order,
    so a given rng state pins every initial value.  Each pooling halves the
    spatial size, which must stay even at every block.
    """
    size = arch.image_size
    layers: list[Layer] = []
    channels = arch.in_channels
    for out_c in arch.conv_channels:
        layers.append(Conv2D(channels, out_c, rng))
        layers.append(ReLU())
        if size % 2:
            raise ValueError(
                f"spatial size {size} is odd; cannot 2x2-pool after conv to {out_c} channels"
            )
        layers.append(MaxPool2x2())
        size //= 2
        channels = out_c
    layers.append(Flatten())
    flat = size * size * channels
    layers.append(Dense(flat, arch.hidden_units, rng))
    layers.append(ReLU())
    layers.append(Dense(arch.hidden_units, arch.n_classes, rng))
    if arch.include_output_sigmoid:
        layers.append(Sigmoid())
    net = Network(layers)
    net.architecture = arch
    return net


def build_toy_network(rng: np.random.Generator, image_size: int = 16) -> Network:
    """The default small classifier: conv8/pool, conv16/pool, dense 32, dense 2."""
    return build_network(NetworkArchitecture(image_size=image_size), rng)


@dataclass(frozen=True)
class LossOutput:
    value: float
    grad_wrt_scores: np.ndarray


def bce_loss(
    scores: np.ndarray, targets: np.ndarray, include_complement: bool = False
) -> LossOutput:
    """Cross-entropy of sigmoid scores against one-hot targets.

    The default form charges only the target-node activation:
    L = -(1/m) sum t * log sig(s).  Its score gradient is
    -(1/m) t (1 - sig(s)), so nodes with t = 0 receive no direct loss
    gradient (they still learn through shared layers).  With
    include_complement=True the usual two-sided form is used instead, adding
    -(1/m) sum (1 - t) log(1 - sig(s)) and the matching gradient term.
    Only log arguments are clipped (to 1e-12); gradients use unclipped
    activations.
    """
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if scores.shape != targets.shape:
        raise ValueError(f"scores shape {scores.shape} != targets shape {targets.shape}")
    if scores.ndim != 2:
        raise ValueError(f"scores must be (batch, classes), got {scores.shape}")
    m = scores.shape[0]
    if m == 0:
        raise ValueError("empty batch")
    probs = expit(scores)
    clipped = np.clip(probs, _LOG_CLIP, 1.0 - _LOG_CLIP)
    value = float(-np.sum(targets * np.log(clipped)) / m)
    grad = -(targets * (1.0 - probs)) / m
    if include_complement:
        value += float(-np.sum((1.0 - targets) * np.log(1.0 - clipped)) / m)
        grad = grad + ((1.0 - targets) * probs) / m
    return LossOutput(value=value, grad_wrt_scores=grad)


def predict_scores(network: Network, images: np.ndarray) -> np.ndarray:
    out, _ = network.forward(images)
    return out


def predict_proba(network: Network, images: np.ndarray) -> np.ndarray:
    """Per-class sigmoid activations, normalized to sum to one per row."""
    acts = expit(predict_scores(network, images))
    total = acts.sum(axis=1, keepdims=True)
    total = np.where(total == 0.0, 1.0, total)
    return acts / total


def accuracy(scores: np.ndarray, targets: np.ndarray) -> float:
    """Fraction of rows whose top score matches the one-hot target."""
    return float(np.mean(np.argmax(scores, axis=1) == np.argmax(targets, axis=1)))

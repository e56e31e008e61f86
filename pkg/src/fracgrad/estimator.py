"""Scikit-learn-style front door for the fractional-update CNN classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .config import FgdConfig
from .nn.network import NetworkArchitecture, build_network, predict_proba, predict_scores
from .nn.training import EpochRecord, evaluate, init_param_states, train_step


class FgdClassifier(BaseEstimator, ClassifierMixin):
    """Binary image classifier trained with fractional-order updates.

    The network is the small conv/pool stack; interlayer gradients are
    ordinary backprop while each parameter tensor is updated through the
    truncated fractional series with its own movement history.  X may be
    (N, H, W, 1), (N, H, W), or flat (N, H*W) square images with values
    expected in [0, 1]; y may hold any two label values.
    """

    def __init__(
        self,
        alpha: float = 0.9,
        n_terms: int = 1,
        learning_rate: float = 0.1,
        phi: float = 1e-8,
        gradient_point: str = "current",
        momentum: float = 0.0,
        epochs: int = 6,
        batch_size: int = 10,
        conv_channels: tuple[int, ...] = (8, 16),
        hidden_units: int = 32,
        standard_bce: bool = False,
        random_state: int = 0,
    ):
        self.alpha = alpha
        self.n_terms = n_terms
        self.learning_rate = learning_rate
        self.phi = phi
        self.gradient_point = gradient_point
        self.momentum = momentum
        self.epochs = epochs
        self.batch_size = batch_size
        self.conv_channels = conv_channels
        self.hidden_units = hidden_units
        self.standard_bce = standard_bce
        self.random_state = random_state

    def _config(self) -> FgdConfig:
        return FgdConfig(
            alpha=self.alpha,
            n_terms=self.n_terms,
            learning_rate=self.learning_rate,
            phi=self.phi,
            gradient_point=self.gradient_point,
            momentum=self.momentum,
        )

    def fit(self, X, y) -> "FgdClassifier":
        from .validation import as_binary_targets, as_image_batch

        cfg = self._config()
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        images = as_image_batch(X)
        classes, targets = as_binary_targets(y)

        rng = np.random.default_rng(self.random_state)
        arch = NetworkArchitecture(
            image_size=images.shape[1],
            conv_channels=tuple(self.conv_channels),
            hidden_units=self.hidden_units,
        )
        network = build_network(arch, rng)
        states = init_param_states(network, cfg)
        history: list[EpochRecord] = []
        n = images.shape[0]
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            losses = []
            for lo in range(0, n, self.batch_size):
                batch = order[lo : lo + self.batch_size]
                loss, _ = train_step(
                    network, images[batch], targets[batch], states, cfg, self.standard_bce
                )
                losses.append(loss)
            train_loss, train_acc = evaluate(network, images, targets, self.standard_bce)
            history.append(
                EpochRecord(
                    epoch=epoch,
                    mean_loss=float(np.mean(losses)),
                    train_accuracy=train_acc,
                    test_accuracy=float("nan"),
                )
            )
        self.classes_ = classes
        self.network_ = network
        self.architecture_ = arch
        self.history_ = history
        self.image_size_ = images.shape[1]
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "network_"):
            raise RuntimeError("this FgdClassifier instance is not fitted yet")

    def predict(self, X) -> np.ndarray:
        from .validation import as_image_batch

        self._check_fitted()
        images = as_image_batch(X, image_size=self.image_size_)
        scores = predict_scores(self.network_, images)
        return self.classes_[np.argmax(scores, axis=1)]

    def predict_proba(self, X) -> np.ndarray:
        from .validation import as_image_batch

        self._check_fitted()
        images = as_image_batch(X, image_size=self.image_size_)
        return predict_proba(self.network_, images)

"""Training loop: integer-order backprop between layers, fractional updates
per parameter tensor.

Each trainable tensor owns an independent optimizer state with its own
(point, gradient) history; the update for a tensor uses elementwise distances
that tensor moved last step.  Nothing about the backward pass changes with
the fractional settings, so gradients are identical across configurations
and only the applied updates differ.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from ..config import FgdConfig
from ..data import Dataset
from ..optimizer import ParamState, init_state, step
from .network import (
    Network,
    NetworkArchitecture,
    accuracy,
    bce_loss,
    build_network,
)

METRICS_COLUMNS = (
    "iteration",
    "epoch",
    "loss",
    "train_accuracy",
    "test_accuracy",
    "alpha",
    "n_terms",
    "seed",
)


def init_param_states(network: Network, cfg: FgdConfig) -> list[ParamState]:
    """One optimizer state per trainable tensor, aligned with parameters()."""
    return [init_state(network.get_param(ref), cfg) for ref in network.parameters()]


def train_step(
    network: Network,
    batch_images: np.ndarray,
    batch_targets: np.ndarray,
    states: list[ParamState],
    cfg: FgdConfig,
    standard_bce: bool = False,
) -> tuple[float, float]:
    """One forward/backward/update cycle; returns (batch loss, batch accuracy).

    Loss and accuracy describe the model as it entered the step; parameter
    tensors are updated in place through their optimizer states.
    """
    refs = network.parameters()
    if len(states) != len(refs):
        raise ValueError(f"got {len(states)} states for {len(refs)} parameter tensors")
    scores, caches = network.forward(batch_images)
    loss = bce_loss(scores, batch_targets, include_complement=standard_bce)
    grads = network.backward(caches, loss.grad_wrt_scores)
    for ref, st in zip(refs, states):
        layer_grads = grads[ref[0]]
        step(st, layer_grads[ref[1]], cfg)
        network.set_param(ref, st.current)
    return loss.value, accuracy(scores, batch_targets)


def evaluate(
    network: Network,
    images: np.ndarray,
    targets: np.ndarray,
    standard_bce: bool = False,
) -> tuple[float, float]:
    """(loss, accuracy) of the current model on a full array pair."""
    scores, _ = network.forward(images)
    return bce_loss(scores, targets, include_complement=standard_bce).value, accuracy(
        scores, targets
    )


@dataclass
class IterationRecord:
    iteration: int
    epoch: int
    loss: float
    train_accuracy: float
    test_accuracy: float


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    train_accuracy: float
    test_accuracy: float


@dataclass
class RunMetrics:
    """Everything one training run produced.

    Per-iteration rows hold only deterministic quantities; wall-clock time
    is kept at run level so that repeated runs with one seed serialize to
    identical bytes.
    """

    alpha: float
    n_terms: int
    seed: int
    records: list[IterationRecord] = field(default_factory=list)
    epochs: list[EpochRecord] = field(default_factory=list)
    final_train_accuracy: float = 0.0
    final_test_accuracy: float = 0.0
    elapsed_seconds: float = 0.0

    def write_csv(self, fileobj: io.TextIOBase) -> None:
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for r in self.records:
            writer.writerow(
                [
                    r.iteration,
                    r.epoch,
                    repr(r.loss),
                    repr(r.train_accuracy),
                    repr(r.test_accuracy),
                    repr(self.alpha),
                    self.n_terms,
                    self.seed,
                ]
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def summary_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_terms": self.n_terms,
            "seed": self.seed,
            "final_train_accuracy": self.final_train_accuracy,
            "final_test_accuracy": self.final_test_accuracy,
            "elapsed_seconds": self.elapsed_seconds,
            "epochs": [
                {
                    "epoch": e.epoch,
                    "mean_loss": e.mean_loss,
                    "train_accuracy": e.train_accuracy,
                    "test_accuracy": e.test_accuracy,
                }
                for e in self.epochs
            ],
        }


def run_training(
    dataset: Dataset,
    cfg: FgdConfig,
    epochs: int,
    batch_size: int,
    seed: int,
    arch: NetworkArchitecture | None = None,
    standard_bce: bool = False,
    eval_every: int = 1,
) -> tuple[Network, RunMetrics]:
    """Build, initialize, and train a network; fully determined by seed.

    One Generator seeds both the parameter draws and the per-epoch shuffles,
    so a (dataset, cfg, epochs, batch_size, seed) tuple pins every float in
    the metrics.  Batches are consecutive slices of each epoch's permutation;
    a short final batch is still used.
    """
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if eval_every < 1:
        raise ValueError(f"eval_every must be >= 1, got {eval_every}")
    rng = np.random.default_rng(seed)
    network = build_network(arch or NetworkArchitecture(), rng)
    states = init_param_states(network, cfg)
    metrics = RunMetrics(alpha=cfg.alpha, n_terms=cfg.n_terms, seed=seed)

    train_x = dataset.train.images
    train_y = dataset.train.labels
    test_x = dataset.test.images
    test_y = dataset.test.labels
    n_train = train_x.shape[0]

    started = time.perf_counter()
    iteration = 0
    last_test_acc = float("nan")
    for epoch in range(epochs):
        order = rng.permutation(n_train)
        epoch_losses = []
        for lo in range(0, n_train, batch_size):
            batch = order[lo : lo + batch_size]
            loss, batch_acc = train_step(
                network, train_x[batch], train_y[batch], states, cfg, standard_bce
            )
            epoch_losses.append(loss)
            if iteration % eval_every == 0:
                _, last_test_acc = evaluate(network, test_x, test_y, standard_bce)
            metrics.records.append(
                IterationRecord(
                    iteration=iteration,
                    epoch=epoch,
                    loss=loss,
                    train_accuracy=batch_acc,
                    test_accuracy=last_test_acc,
                )
            )
            iteration += 1
        _, train_acc = evaluate(network, train_x, train_y, standard_bce)
        _, test_acc = evaluate(network, test_x, test_y, standard_bce)
        metrics.epochs.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=float(np.mean(epoch_losses)),
                train_accuracy=train_acc,
                test_accuracy=test_acc,
            )
        )
    metrics.elapsed_seconds = time.perf_counter() - started
    metrics.final_train_accuracy = metrics.epochs[-1].train_accuracy
    metrics.final_test_accuracy = metrics.epochs[-1].test_accuracy
    return network, metrics

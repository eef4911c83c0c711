"""Minibatch SGD with momentum, validation tracking, and history export."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, NumericError
from .model import CnnModel, loss_and_grads


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    dropout_rate: float = 0.5
    seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be positive")
        if self.learning_rate < 0 or self.momentum < 0:
            raise ConfigurationError("learning_rate and momentum must be nonnegative")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigurationError("dropout_rate must be in [0, 1)")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigurationError("validation_fraction must be in [0, 1)")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_acc: float


def accuracy(model: CnnModel, images, labels) -> float:
    preds = model.predict_probs(images).argmax(axis=1)
    return float(np.mean(preds == np.asarray(labels)))


def train(model: CnnModel, images, labels, cfg: TrainConfig):
    """Train in place; returns (model, history of per-epoch stats).

    Deterministic for a fixed (cfg.seed, data order, thread count): the
    validation split, batch shuffles, and dropout masks all derive from
    one generator seeded by cfg.seed.
    """
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64)
    if len(images) == 0:
        raise ConfigurationError("empty training dataset")
    if len(images) != len(labels):
        raise ConfigurationError("image and label counts differ")
    if labels.min() < 0 or labels.max() >= model.num_classes:
        raise ConfigurationError(
            f"labels must lie in [0, {model.num_classes})"
        )

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(images))
    n_val = int(len(images) * cfg.validation_fraction)
    val_idx = order[len(images) - n_val :]
    train_idx = order[: len(images) - n_val]
    if len(train_idx) == 0:
        raise ConfigurationError("validation fraction leaves no training data")

    params = model.params()
    velocity = [np.zeros_like(p) for p in params]
    history: list[EpochStats] = []

    for epoch in range(cfg.epochs):
        perm = train_idx[rng.permutation(len(train_idx))]
        total_loss = 0.0
        for start in range(0, len(perm), cfg.batch_size):
            batch = perm[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(model, images[batch], labels[batch], rng=rng)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            total_loss += loss * len(batch)
            for p, v, g in zip(params, velocity, grads):
                v *= cfg.momentum
                v -= cfg.learning_rate * g
                p += v
        train_loss = total_loss / len(perm)
        val_acc = accuracy(model, images[val_idx], labels[val_idx]) if n_val else float("nan")
        history.append(EpochStats(epoch, train_loss, val_acc))
    return model, history


def write_history_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_acc"])
        for row in history:
            writer.writerow([row.epoch, f"{row.train_loss:.17g}", f"{row.val_acc:.17g}"])


def read_history_csv(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(
                EpochStats(int(row["epoch"]), float(row["train_loss"]), float(row["val_acc"]))
            )
    return out

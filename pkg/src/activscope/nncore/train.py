"""Seeded SGD with momentum for the CNN engine.

Training is single-threaded by contract: a fixed seed must reproduce the
shuffle order, the init, and the final weights bit for bit.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .model import Activations, LayerParams, ModelSpec, backward, batch_loss, forward


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 20
    weight_decay: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise TrainingError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "momentum": self.momentum,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "weight_decay": self.weight_decay,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def patches_to_batch(pixel_arrays):
    """Stack (h, w, 3) uint8 patches into a centered float32 (n, 3, h, w) batch."""
    arr = np.stack([np.asarray(p) for p in pixel_arrays]).astype(np.float32)
    arr = arr / 255.0 - 0.5
    return np.ascontiguousarray(arr.transpose(0, 3, 1, 2))


def dataset_arrays(dataset):
    """Pull (inputs, labels) out of anything with .records of patches."""
    records = list(dataset.records)
    if not records:
        raise TrainingError("empty dataset")
    x = patches_to_batch([r.pixels for r in records])
    y = np.array([r.target for r in records], dtype=np.int64)
    bad = set(np.unique(y)) - {0, 1}
    if bad:
        raise TrainingError(f"labels must be 0/1, found {sorted(bad)}")
    return x, y


def train_sgd(model, dataset, cfg):
    """Train a copy of the model; returns (trained_model, epoch_mean_losses)."""
    x_all, y_all = dataset_arrays(dataset)
    n = len(y_all)
    trained = ModelSpec(
        name=model.name,
        input_size=model.input_size,
        layers=list(model.layers),
        weights=[
            None if p is None else LayerParams(p.w.astype(np.float32), p.b.astype(np.float32))
            for p in model.weights
        ],
        seed=model.seed,
        assigned_layer=model.assigned_layer,
        swapped=model.swapped,
    )
    velocity = [
        None if p is None else LayerParams(np.zeros_like(p.w), np.zeros_like(p.b))
        for p in trained.weights
    ]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        running = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            acts = forward(trained, x_all[idx], keep_caches=True)
            loss = batch_loss(acts.logits, y_all[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            running += loss * len(idx)
            grads = backward(trained, acts, y_all[idx])
            for li, g in enumerate(grads):
                if g is None:
                    continue
                dw, db = g
                p = trained.weights[li]
                v = velocity[li]
                # weight decay applies to weights only, never biases
                v.w[...] = cfg.momentum * v.w - cfg.learning_rate * (dw + cfg.weight_decay * p.w)
                v.b[...] = cfg.momentum * v.b - cfg.learning_rate * db
                p.w += v.w
                p.b += v.b
        losses.append(running / n)
    return trained, losses


def evaluate(model, dataset, batch_size=256):
    """Classification accuracy of the end-to-end model on a dataset."""
    x_all, y_all = dataset_arrays(dataset)
    hits = 0
    for start in range(0, len(y_all), batch_size):
        probs = forward(model, x_all[start : start + batch_size]).probabilities
        hits += int((probs.argmax(axis=1) == y_all[start : start + batch_size]).sum())
    return hits / len(y_all)

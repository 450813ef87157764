"""Analytic-vs-numeric gradient validation for the training engine."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .model import backward, batch_loss, forward

# Coordinates where analytic and numeric gradients are both below this floor
# count as matching; central differences cannot resolve anything smaller.
DENOM_FLOOR = 1e-6


@dataclass
class GradCheckReport:
    """Max relative error per parameter group, against a stated tolerance."""

    tolerance: float
    groups: dict = field(default_factory=dict)

    @property
    def max_relative_error(self):
        return max(self.groups.values()) if self.groups else 0.0

    @property
    def passed(self):
        return self.max_relative_error <= self.tolerance


def _loss_at(model, x, label):
    return batch_loss(forward(model, x).logits, label)


def grad_check(model, sample, label, epsilon=1e-4, tolerance=1e-3, per_group=24, seed=0):
    """Compare backprop gradients with central finite differences.

    Runs in 64-bit mode on a cloned model. For each parameter group a seeded
    subset of coordinates is perturbed by +/- epsilon; the relative error is
    |analytic - numeric| / max(|analytic|, |numeric|, floor).
    """
    if not (1e-5 <= epsilon <= 1e-2):
        raise TrainingError(f"epsilon must be in [1e-5, 1e-2], got {epsilon}")
    m = model.astype(np.float64)
    x = np.asarray(sample, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    y = np.array([label], dtype=np.int64) if np.isscalar(label) else np.asarray(label)

    acts = forward(m, x, keep_caches=True)
    grads = backward(m, acts, y)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    report = GradCheckReport(tolerance=tolerance)
    for li, g in enumerate(grads):
        if g is None:
            continue
        params = m.weights[li]
        for tag, analytic, arr in (("w", g[0], params.w), ("b", g[1], params.b)):
            flat = arr.reshape(-1)
            aflat = analytic.reshape(-1)
            k = min(per_group, flat.size)
            coords = rng.choice(flat.size, size=k, replace=False)
            worst = 0.0
            for c in coords:
                keep = flat[c]
                flat[c] = keep + epsilon
                up = _loss_at(m, x, y)
                flat[c] = keep - epsilon
                down = _loss_at(m, x, y)
                flat[c] = keep
                numeric = (up - down) / (2 * epsilon)
                denom = max(abs(aflat[c]), abs(numeric), DENOM_FLOOR)
                worst = max(worst, abs(aflat[c] - numeric) / denom)
            report.groups[f"layer{li:02d}.{m.layers[li].kind}.{tag}"] = worst
    return report

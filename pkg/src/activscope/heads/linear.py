"""Linear heads: L2-regularized logistic regression and a linear SVM.

Both fitters standardize columns internally for conditioning and fold the
scaling back into the stored weights, so a model's decision score is always
plain w.x + b in the original feature space.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import FitError, ShapeError


@dataclass(frozen=True)
class LogisticConfig:
    learning_rate: float = 0.1
    iterations: int = 500
    l2: float = 1e-4
    seed: int = 0


@dataclass(frozen=True)
class SvmConfig:
    epochs: int = 15
    l2: float = 1e-4
    seed: int = 0


def _check_training_input(fm):
    classes = np.unique(fm.labels)
    if len(classes) < 2:
        raise FitError(f"need both classes to fit, got only {sorted(classes.tolist())}")
    if fm.n < 2:
        raise FitError(f"need at least 2 rows to fit, got {fm.n}")


def _standardize(X):
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    sigma = np.where(sigma > 0, sigma, 1.0)  # constant columns carry no signal
    return (X - mu) / sigma, mu, sigma


def _fold_back(w_std, b_std, mu, sigma):
    w = w_std / sigma
    b = b_std - float(np.dot(w_std, mu / sigma))
    return w, b


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_grad(w, b, X, y, l2):
    """Regularized cross-entropy and its exact gradient (used by fit and checks)."""
    z = X @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    loss = float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))
    loss += 0.5 * l2 * float(np.dot(w, w))
    resid = p - y
    grad_w = X.T @ resid / len(y) + l2 * w
    grad_b = float(resid.mean())
    return loss, grad_w, grad_b


@dataclass
class LogisticModel:
    w: np.ndarray
    b: float
    config: LogisticConfig
    seed: int
    loss_trace: list = field(default_factory=list, repr=False)

    def decision(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != len(self.w):
            raise ShapeError(f"input dim {X.shape[1]} != model dim {len(self.w)}")
        return X @ self.w + self.b

    def predict_proba(self, X):
        return _sigmoid(self.decision(X))

    def predict(self, X):
        return (self.decision(X) >= 0).astype(np.uint8)


def fit_logistic(fm, cfg=None):
    """Full-batch gradient descent on the regularized cross-entropy."""
    cfg = cfg or LogisticConfig()
    _check_training_input(fm)
    Xs, mu, sigma = _standardize(fm.X.astype(np.float64))
    y = fm.labels.astype(np.float64)
    w = np.zeros(fm.d)
    b = 0.0
    trace = []
    for _ in range(cfg.iterations):
        loss, gw, gb = logistic_loss_grad(w, b, Xs, y, cfg.l2)
        trace.append(loss)
        w -= cfg.learning_rate * gw
        b -= cfg.learning_rate * gb
    w_raw, b_raw = _fold_back(w, b, mu, sigma)
    return LogisticModel(w=w_raw, b=b_raw, config=cfg, seed=cfg.seed, loss_trace=trace)


def hinge_objective(w, b, X, y_signed, l2):
    """Pegasos objective: mean hinge loss plus (l2/2)||w||^2."""
    margins = y_signed * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(hinge.mean() + 0.5 * l2 * np.dot(w, w))


@dataclass
class LinearSvmModel:
    w: np.ndarray
    b: float
    config: SvmConfig
    seed: int
    objective_trace: list = field(default_factory=list, repr=False)

    def decision(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != len(self.w):
            raise ShapeError(f"input dim {X.shape[1]} != model dim {len(self.w)}")
        return X @ self.w + self.b

    def predict(self, X):
        return (self.decision(X) >= 0).astype(np.uint8)


def fit_svm(fm, cfg=None):
    """Epoch-ordered Pegasos subgradient descent; the model is the averaged iterate.

    Step t uses eta = 1 / (l2 * t), shrinks w by (1 - eta*l2), adds eta*y*x on a
    margin violation, then projects w onto the ball of radius 1/sqrt(l2). The
    bias follows the violation updates and is not regularized. The per-epoch
    objective of the running average is logged.
    """
    cfg = cfg or SvmConfig()
    _check_training_input(fm)
    Xs, mu, sigma = _standardize(fm.X.astype(np.float64))
    y_signed = np.where(fm.labels > 0, 1.0, -1.0)
    n, d = Xs.shape
    lam = cfg.l2
    radius = 1.0 / np.sqrt(lam)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))

    w = np.zeros(d)
    b = 0.0
    w_sum = np.zeros(d)
    b_sum = 0.0
    t = 0
    trace = []
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            w *= 1.0 - eta * lam
            if y_signed[i] * (Xs[i] @ w + b) < 1.0:
                w += eta * y_signed[i] * Xs[i]
                b += eta * lam * y_signed[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            w_sum += w
            b_sum += b
        trace.append(hinge_objective(w_sum / t, b_sum / t, Xs, y_signed, lam))
    w_avg = w_sum / t
    b_avg = b_sum / t
    w_raw, b_raw = _fold_back(w_avg, b_avg, mu, sigma)
    return LinearSvmModel(w=w_raw, b=b_raw, config=cfg, seed=cfg.seed, objective_trace=trace)

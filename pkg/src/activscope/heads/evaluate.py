"""Shared prediction and accuracy helpers for the classifier heads."""

import numpy as np


def predict(model, fm_or_X):
    """Predicted labels for a FeatureMatrix or a plain (n, d) array."""
    X = fm_or_X.X if hasattr(fm_or_X, "X") else np.asarray(fm_or_X)
    return model.predict(X)


def accuracy(model, fm):
    """Fraction of FeatureMatrix rows the model labels correctly."""
    preds = predict(model, fm)
    return float((preds == fm.labels).mean())

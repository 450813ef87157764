"""Feature taps: pull per-patch activation rows into a FeatureMatrix."""

import numpy as np

from ..heads.features import FeatureMatrix
from .model import forward
from .train import dataset_arrays

EXTRACT_BATCH = 128


def tap_provenance(model, tap):
    """(channel, flat position) origin of every tap column."""
    idx = model.tap_index(tap)
    shapes = model.shapes()
    d = int(np.prod(shapes[idx]))
    prov = np.zeros((d, 2), dtype=np.uint32)
    if tap in ("flat_conv", "gap"):
        c, h, w = shapes[idx - 1]  # map feeding the flatten
        prov[:, 0] = np.arange(d) // (h * w)
        prov[:, 1] = np.arange(d) % (h * w)
    else:
        prov[:, 0] = np.arange(d)
    return prov


def extract_features(model, tap, dataset):
    """Row i is the tap activation of patch i; labels carried through."""
    return extract_features_multi(model, [tap], dataset)[tap]


def extract_features_multi(model, taps, dataset):
    """One forward sweep, several taps; returns {tap: FeatureMatrix}."""
    indices = {tap: model.tap_index(tap) for tap in taps}
    x_all, y_all = dataset_arrays(dataset)
    rows = {tap: [] for tap in taps}
    for start in range(0, len(y_all), EXTRACT_BATCH):
        acts = forward(model, x_all[start : start + EXTRACT_BATCH])
        for tap, idx in indices.items():
            out = acts.outputs[idx]
            rows[tap].append(out.reshape(out.shape[0], -1).astype(np.float32))
    labels = y_all.astype(np.uint8)
    return {
        tap: FeatureMatrix(
            X=np.vstack(rows[tap]),
            labels=labels,
            tap=tap,
            provenance=tap_provenance(model, tap),
        )
        for tap in taps
    }

"""JSON persistence for the classifier heads."""

import json
from dataclasses import asdict

import numpy as np

from ..errors import ModelIOError
from .forest import ForestConfig, ForestModel
from .linear import LinearSvmModel, LogisticConfig, LogisticModel, SvmConfig

_KINDS = {"logistic": LogisticModel, "svm": LinearSvmModel, "forest": ForestModel}


def save_head(model, path):
    if isinstance(model, LogisticModel):
        doc = {
            "kind": "logistic",
            "w": model.w.tolist(),
            "b": model.b,
            "seed": model.seed,
            "config": asdict(model.config),
        }
    elif isinstance(model, LinearSvmModel):
        doc = {
            "kind": "svm",
            "w": model.w.tolist(),
            "b": model.b,
            "seed": model.seed,
            "config": asdict(model.config),
        }
    elif isinstance(model, ForestModel):
        doc = {
            "kind": "forest",
            "trees": model.trees,
            "seed": model.seed,
            "config": asdict(model.config),
            "raw_importance": model.raw_importance.tolist(),
        }
    else:
        raise ModelIOError(f"cannot persist head of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_head(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelIOError(f"{path}: cannot read head model: {exc}") from exc
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise ModelIOError(f"{path}: unknown head kind {kind!r}")
    if kind == "logistic":
        return LogisticModel(
            w=np.asarray(doc["w"], dtype=np.float64),
            b=doc["b"],
            config=LogisticConfig(**doc["config"]),
            seed=doc["seed"],
        )
    if kind == "svm":
        return LinearSvmModel(
            w=np.asarray(doc["w"], dtype=np.float64),
            b=doc["b"],
            config=SvmConfig(**doc["config"]),
            seed=doc["seed"],
        )
    cfg = doc["config"]
    return ForestModel(
        trees=doc["trees"],
        config=ForestConfig(
            n_trees=cfg["n_trees"],
            max_depth=cfg["max_depth"],
            max_features=cfg["max_features"],
            bootstrap=cfg["bootstrap"],
            seed=cfg["seed"],
        ),
        seed=doc["seed"],
        raw_importance=np.asarray(doc["raw_importance"], dtype=np.float64),
    )

"""Random forest of CART trees with Gini splits and impurity-based importance."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import FitError, ShapeError
from ..parallel import parallel_map


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None  # None grows to purity
    max_features: str | int = "sqrt"
    bootstrap: bool = True
    seed: int = 0


def gini(counts):
    """Gini impurity 1 - sum(p^2) from a (n0, n1) count pair."""
    total = counts[0] + counts[1]
    if total == 0:
        return 0.0
    p0 = counts[0] / total
    p1 = counts[1] / total
    return 1.0 - p0 * p0 - p1 * p1


def _resolve_max_features(spec, d):
    if spec == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    if isinstance(spec, int):
        return max(1, min(spec, d))
    raise FitError(f"unknown max_features spec {spec!r}")


def _best_split(X, y, rows, feats):
    """Best (gain, feature, threshold) over candidate features.

    Ties resolve to the lowest feature index (features are scanned in
    ascending order, updates require strictly larger gain) and then to the
    lowest threshold (argmax picks the first midpoint in sorted order).
    """
    ys = y[rows]
    n = len(rows)
    pos = int(ys.sum())
    parent = gini((n - pos, pos))
    if parent == 0.0:
        return None
    best = None
    for f in feats:
        xv = X[rows, f]
        order = np.argsort(xv, kind="stable")
        xs = xv[order].astype(np.float64)
        yo = ys[order]
        cut = np.nonzero(xs[:-1] < xs[1:])[0]
        if cut.size == 0:
            continue
        n_left = cut + 1
        pos_left = np.cumsum(yo)[cut]
        n_right = n - n_left
        pos_right = pos - pos_left
        pl = pos_left / n_left
        pr = pos_right / n_right
        g_left = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
        g_right = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
        weighted = (n_left * g_left + n_right * g_right) / n
        gain = parent - weighted
        k = int(np.argmax(gain))
        if gain[k] <= 0:
            continue
        if best is None or gain[k] > best[0]:
            thr = (xs[cut[k]] + xs[cut[k] + 1]) / 2.0
            best = (float(gain[k]), int(f), float(thr))
    return best


def _grow_tree(X, y, rows, rng, max_features, max_depth, depth, importance, n_total):
    ys = y[rows]
    pos = int(ys.sum())
    counts = (len(rows) - pos, pos)
    if counts[0] == 0 or counts[1] == 0 or (max_depth is not None and depth >= max_depth):
        return {"counts": list(counts)}
    d = X.shape[1]
    feats = np.sort(rng.choice(d, size=min(max_features, d), replace=False))
    split = _best_split(X, y, rows, feats)
    if split is None:
        return {"counts": list(counts)}
    gain, f, thr = split
    importance[f] += (len(rows) / n_total) * gain
    mask = X[rows, f] <= thr
    left = _grow_tree(X, y, rows[mask], rng, max_features, max_depth, depth + 1, importance, n_total)
    right = _grow_tree(
        X, y, rows[~mask], rng, max_features, max_depth, depth + 1, importance, n_total
    )
    return {"feature": f, "threshold": thr, "left": left, "right": right}


def _tree_predict(tree, X):
    out = np.zeros(len(X), dtype=np.uint8)
    stack = [(tree, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if "counts" in node:
            c0, c1 = node["counts"]
            out[idx] = 1 if c1 > c0 else 0  # leaf ties go to class 0
            continue
        go_left = X[idx, node["feature"]] <= node["threshold"]
        stack.append((node["left"], idx[go_left]))
        stack.append((node["right"], idx[~go_left]))
    return out


@dataclass
class ForestModel:
    trees: list
    config: ForestConfig
    seed: int
    raw_importance: np.ndarray = field(repr=False, default=None)

    @property
    def d(self):
        return len(self.raw_importance)

    def predict(self, X):
        X = np.asarray(X)
        if not self.trees:
            raise FitError("forest has no trees; fit it first")
        if X.shape[1] != self.d:
            raise ShapeError(f"input dim {X.shape[1]} != model dim {self.d}")
        votes = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees:
            votes += _tree_predict(tree, X)
        # majority vote; exact ties go to class 0
        return (votes * 2 > len(self.trees)).astype(np.uint8)


def fit_forest(fm, cfg=None):
    """Bootstrap CART trees in parallel; per-tree seeds keep results deterministic."""
    cfg = cfg or ForestConfig()
    classes = np.unique(fm.labels)
    if len(classes) < 2:
        raise FitError(f"need both classes to fit, got only {sorted(classes.tolist())}")
    X = fm.X
    y = fm.labels.astype(np.int64)
    n, d = X.shape
    max_features = _resolve_max_features(cfg.max_features, d)

    def one_tree(tree_idx):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, tree_idx])))
        rows = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        importance = np.zeros(d)
        tree = _grow_tree(X, y, np.asarray(rows), rng, max_features, cfg.max_depth, 0, importance, n)
        return tree, importance

    results = parallel_map(one_tree, range(cfg.n_trees))
    trees = [t for t, _ in results]
    raw = np.mean([imp for _, imp in results], axis=0)
    return ForestModel(trees=trees, config=cfg, seed=cfg.seed, raw_importance=raw)


def importance(model):
    """Mean decrease in Gini impurity per feature, normalized to sum to 1."""
    if model.raw_importance is None or not model.trees:
        raise FitError("forest has no trees; fit it first")
    total = model.raw_importance.sum()
    if total <= 0:
        raise FitError("forest made no splits; importance is undefined")
    return model.raw_importance / total


def top_k_features(model, k):
    """Indices of the k most important features, ties broken by lower index."""
    imp = importance(model)
    order = np.lexsort((np.arange(len(imp)), -imp))
    return np.sort(order[:k])

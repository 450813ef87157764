"""Balanced positive/negative patch sampling from annotated scenes.

Candidate top-left corners live on a fixed grid. A patch is positive when
its lesion-overlap fraction reaches tau, negative when the overlap is
exactly zero; anything in between is never emitted, which keeps boundary
patches out of both classes.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import SamplingError, ShapeError

GRID_STRIDE = 8
POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass
class PatchRecord:
    """One sampled patch with its label and provenance."""

    scene_id: str
    y: int
    x: int
    label: str
    overlap: float
    pixels: np.ndarray  # (p, p, 3) uint8

    @property
    def target(self):
        return 1 if self.label == POSITIVE else 0

    @property
    def key(self):
        return (self.scene_id, self.y, self.x)


@dataclass
class DatasetManifest:
    """An ordered patch corpus with the sampling parameters that made it."""

    records: list
    split: str
    tau: float
    seed: int
    patch_size: int
    grid_stride: int = GRID_STRIDE

    @property
    def counts(self):
        pos = sum(1 for r in self.records if r.label == POSITIVE)
        return {POSITIVE: pos, NEGATIVE: len(self.records) - pos}

    @property
    def balanced(self):
        c = self.counts
        return c[POSITIVE] == c[NEGATIVE]

    def __len__(self):
        return len(self.records)


def overlap_grid(mask, patch_size, stride=GRID_STRIDE):
    """Overlap fraction for every grid-aligned top-left, via an integral image.

    Integer-exact: the returned fractions are (pixel count) / patch_size^2
    computed in int64, so recomputing any patch's overlap from the mask
    reproduces the stored value bit for bit.
    """
    h, w = mask.shape
    if patch_size > h or patch_size > w:
        raise ShapeError(f"patch size {patch_size} exceeds scene {h}x{w}")
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    ii[1:, 1:] = mask.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
    ys = np.arange(0, h - patch_size + 1, stride)
    xs = np.arange(0, w - patch_size + 1, stride)
    yy = ys[:, None]
    xx = xs[None, :]
    p = patch_size
    sums = ii[yy + p, xx + p] - ii[yy, xx + p] - ii[yy + p, xx] + ii[yy, xx]
    return ys, xs, sums / float(p * p)


def recompute_overlap(scene, y, x, patch_size):
    """Overlap fraction straight from the mask (the storage-independent route)."""
    window = scene.mask[y : y + patch_size, x : x + patch_size]
    return float(window.astype(np.int64).sum()) / float(patch_size * patch_size)


def _eligible_coords(scene, patch_size, tau, stride):
    ys, xs, ov = overlap_grid(scene.mask, patch_size, stride)
    pos_idx = np.argwhere(ov >= tau)
    neg_idx = np.argwhere(ov == 0.0)
    pos = [(int(ys[i]), int(xs[j]), float(ov[i, j])) for i, j in pos_idx]
    neg = [(int(ys[i]), int(xs[j]), 0.0) for i, j in neg_idx]
    return pos, neg


def _take(pool, count, label, rng):
    if count > len(pool):
        raise SamplingError(label, count, len(pool))
    chosen = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in chosen]


def _cut_patch(scene, y, x, patch_size):
    return scene.image[y : y + patch_size, x : x + patch_size].copy()


def sample_patches(scene, patch_size, n_pos, n_neg, tau, seed=0, split="train",
                   stride=GRID_STRIDE):
    """Sample one scene without replacement of top-left coordinates."""
    if not (0.0 < tau <= 1.0):
        raise ShapeError(f"tau must be in (0, 1], got {tau}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    pos_pool, neg_pool = _eligible_coords(scene, patch_size, tau, stride)
    records = []
    for (y, x, ov) in _take(pos_pool, n_pos, POSITIVE, rng):
        records.append(
            PatchRecord(scene.scene_id, y, x, POSITIVE, ov, _cut_patch(scene, y, x, patch_size))
        )
    for (y, x, ov) in _take(neg_pool, n_neg, NEGATIVE, rng):
        records.append(
            PatchRecord(scene.scene_id, y, x, NEGATIVE, ov, _cut_patch(scene, y, x, patch_size))
        )
    return DatasetManifest(
        records=records, split=split, tau=tau, seed=seed, patch_size=patch_size,
        grid_stride=stride,
    )


def sample_dataset(scenes, patch_size, n_pos, n_neg, tau, seed=0, split="train",
                   stride=GRID_STRIDE):
    """Pool eligible coordinates across scenes, then sample without replacement."""
    if not (0.0 < tau <= 1.0):
        raise ShapeError(f"tau must be in (0, 1], got {tau}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    pos_pool = []
    neg_pool = []
    by_id = {s.scene_id: s for s in scenes}
    for s in scenes:
        pos, neg = _eligible_coords(s, patch_size, tau, stride)
        pos_pool.extend((s.scene_id, y, x, ov) for y, x, ov in pos)
        neg_pool.extend((s.scene_id, y, x, ov) for y, x, ov in neg)
    records = []
    for label, pool, count in ((POSITIVE, pos_pool, n_pos), (NEGATIVE, neg_pool, n_neg)):
        if count > len(pool):
            raise SamplingError(label, count, len(pool))
        for i in rng.choice(len(pool), size=count, replace=False):
            sid, y, x, ov = pool[i]
            records.append(
                PatchRecord(sid, y, x, label, ov, _cut_patch(by_id[sid], y, x, patch_size))
            )
    return DatasetManifest(
        records=records, split=split, tau=tau, seed=seed, patch_size=patch_size,
        grid_stride=stride,
    )

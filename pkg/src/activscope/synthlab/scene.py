"""Synthetic annotated scenes: a seeded stand-in for labeled slide regions."""

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import PlacementError, ShapeError
from ..imaging import load_png, save_png, upsample_bilinear
from . import motifs as M

RETRY_BUDGET = 200
HALO_WIDTH = 6.0


@dataclass(frozen=True)
class SceneSpec:
    """Scene size, per-motif target counts and size ranges, seed."""

    size: int = 512
    counts: dict = field(
        default_factory=lambda: {
            "tumor_blob": 7,
            "lymphocyte_dot": 25,
            "collagen_stripe": 4,
            "lumen_hole": 5,
        }
    )
    size_ranges: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.size < 32:
            raise ShapeError(f"scene size {self.size} too small to hold a patch")
        for kind, count in self.counts.items():
            if kind not in M.MOTIF_CLASSES:
                raise ShapeError(f"unknown motif class '{kind}'")
            if count < 0:
                raise ShapeError(f"negative count for motif '{kind}'")

    def size_range(self, kind):
        return tuple(self.size_ranges.get(kind, M.DEFAULT_SIZE_RANGES[kind]))

    def to_dict(self):
        return {
            "size": self.size,
            "counts": dict(self.counts),
            "size_ranges": {k: list(v) for k, v in self.size_ranges.items()},
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        kwargs = {"size": d.get("size", 512), "seed": d.get("seed", 0)}
        if "counts" in d:
            kwargs["counts"] = dict(d["counts"])
        if "size_ranges" in d:
            kwargs["size_ranges"] = {k: tuple(v) for k, v in d["size_ranges"].items()}
        return cls(**kwargs)


@dataclass
class AnnotatedScene:
    """RGB image, binary lesion mask, and the planted-motif inventory."""

    scene_id: str
    image: np.ndarray  # (H, W, 3) uint8
    mask: np.ndarray  # (H, W) uint8, 1 inside planted tumor blobs
    inventory: list
    seed: int = 0

    @property
    def size(self):
        return self.image.shape[0]


def _noise_field(rng, size, cell, amplitude):
    coarse = rng.normal(0.0, amplitude, size=(size // cell + 2, size // cell + 2))
    return upsample_bilinear(coarse, size, size)


def _paint_background(rng, size):
    base = np.array(M.COLORS["background"], dtype=np.float64)
    img = np.empty((size, size, 3), dtype=np.float64)
    img[:] = base
    blotch = _noise_field(rng, size, 32, 6.0)
    img += blotch[:, :, None]
    img += rng.normal(0.0, 3.0, size=(size, size, 3))
    return img


def _bbox_from_mask(local_mask, top, left):
    ys, xs = np.nonzero(local_mask)
    y0, y1 = ys.min(), ys.max()
    x0, x1 = xs.min(), xs.max()
    return (int(top + y0), int(left + x0), int(y1 - y0 + 1), int(x1 - x0 + 1))


def _plant_tumor_blob(rng, img, mask, spec):
    """Irregular purple mass with a pale halo; only its interior enters the mask."""
    lo, hi = spec.size_range("tumor_blob")
    amp = min(0.12, 0.9 * (hi - lo) / (hi + lo))
    r0 = rng.uniform(lo / (1 - amp), hi / (1 + amp))
    margin = int(np.ceil(hi + HALO_WIDTH)) + 1
    if 2 * margin >= spec.size:
        raise PlacementError("tumor_blob", 0)
    for attempt in range(RETRY_BUDGET):
        cy = rng.uniform(margin, spec.size - margin)
        cx = rng.uniform(margin, spec.size - margin)
        # keep mass centers apart so blobs stay mostly distinct
        box = mask[
            int(cy - lo / 2) : int(cy + lo / 2), int(cx - lo / 2) : int(cx + lo / 2)
        ]
        if box.size and box.mean() < 0.05:
            break
    else:
        raise PlacementError("tumor_blob", RETRY_BUDGET)

    modes = np.arange(2, 6)
    amps = rng.uniform(-1.0, 1.0, size=len(modes))
    total = np.abs(amps).sum()
    if total > 0:
        amps *= amp / total  # guarantees r(theta) stays inside [lo, hi]
    phases = rng.uniform(0, 2 * np.pi, size=len(modes))

    top = int(np.floor(cy)) - margin
    left = int(np.floor(cx)) - margin
    ext = 2 * margin + 1
    yy, xx = np.mgrid[0:ext, 0:ext]
    dy = yy + top - cy
    dx = xx + left - cx
    rho = np.hypot(dy, dx)
    theta = np.arctan2(dy, dx)
    r_theta = r0 * (
        1.0 + sum(a * np.cos(m * theta + p) for a, m, p in zip(amps, modes, phases))
    )
    inside = rho <= r_theta
    halo = (rho <= r_theta + HALO_WIDTH) & ~inside

    region = img[top : top + ext, left : left + ext]
    body = np.array(M.COLORS["tumor_blob"], dtype=np.float64)
    halo_col = np.array(M.COLORS["tumor_halo"], dtype=np.float64)
    region[halo] = 0.35 * region[halo] + 0.65 * halo_col
    region[inside] = body + rng.normal(0.0, 5.0, size=(int(inside.sum()), 3))

    # mottled nuclei speckles inside the mass
    n_speck = max(4, int(inside.sum() / 60))
    sy = rng.integers(0, ext, size=n_speck)
    sx = rng.integers(0, ext, size=n_speck)
    keep = inside[sy, sx]
    nuc = np.array(M.COLORS["tumor_nucleus"], dtype=np.float64)
    for py, px in zip(sy[keep], sx[keep]):
        y0, y1 = max(0, py - 1), min(ext, py + 2)
        x0, x1 = max(0, px - 1), min(ext, px + 2)
        patch_mask = inside[y0:y1, x0:x1]
        region[y0:y1, x0:x1][patch_mask] = nuc

    mask[top : top + ext, left : left + ext][inside] = 1
    return M.MotifInstance(
        kind="tumor_blob",
        bbox=_bbox_from_mask(inside, top, left),
        center=(int(round(cy)), int(round(cx))),
        area=int(inside.sum()),
    )


def _plant_lymphocyte_dot(rng, img, mask, spec):
    """Small dark-blue disc; rejected if it would sit on tumor tissue."""
    lo, hi = spec.size_range("lymphocyte_dot")
    for attempt in range(RETRY_BUDGET):
        r = rng.uniform(lo, hi)
        margin = int(np.ceil(r)) + 1
        cy = rng.integers(margin, spec.size - margin)
        cx = rng.integers(margin, spec.size - margin)
        pad = int(np.ceil(r + HALO_WIDTH))
        if mask[
            max(0, cy - pad) : cy + pad, max(0, cx - pad) : cx + pad
        ].any():
            continue
        ext = 2 * margin + 1
        yy, xx = np.mgrid[0:ext, 0:ext]
        inside = (yy - margin) ** 2 + (xx - margin) ** 2 <= r * r
        top, left = cy - margin, cx - margin
        color = np.array(M.COLORS["lymphocyte_dot"], dtype=np.float64)
        color = color + rng.normal(0.0, 6.0, size=3)
        img[top : top + ext, left : left + ext][inside] = color
        return M.MotifInstance(
            kind="lymphocyte_dot",
            bbox=_bbox_from_mask(inside, top, left),
            center=(int(cy), int(cx)),
            area=int(inside.sum()),
        )
    raise PlacementError("lymphocyte_dot", RETRY_BUDGET)


def _plant_collagen_stripe(rng, img, mask, spec):
    """Wavy pale-pink band stamped as discs along a sinusoidal path."""
    lo, hi = spec.size_range("collagen_stripe")
    width = rng.uniform(lo, hi)
    margin = int(np.ceil(width)) + 2
    for attempt in range(RETRY_BUDGET):
        length = rng.uniform(spec.size * 0.3, spec.size * 0.6)
        angle = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(6, 14)
        wavelen = rng.uniform(40, 90)
        y0 = rng.uniform(margin + amp, spec.size - margin - amp)
        x0 = rng.uniform(margin + amp, spec.size - margin - amp)
        t = np.arange(0, length, 1.5)
        wob = amp * np.sin(2 * np.pi * t / wavelen + rng.uniform(0, 2 * np.pi))
        py = y0 + t * np.sin(angle) + wob * np.cos(angle)
        px = x0 + t * np.cos(angle) - wob * np.sin(angle)
        ok = (
            (py > margin)
            & (py < spec.size - margin)
            & (px > margin)
            & (px < spec.size - margin)
        )
        if ok.all():
            break
    else:
        raise PlacementError("collagen_stripe", RETRY_BUDGET)

    color = np.array(M.COLORS["collagen_stripe"], dtype=np.float64)
    stamp_r = width / 2
    ir = int(np.ceil(stamp_r))
    yy, xx = np.mgrid[-ir : ir + 1, -ir : ir + 1]
    disc = yy * yy + xx * xx <= stamp_r * stamp_r
    painted = np.zeros(img.shape[:2], dtype=bool)
    for cy, cx in zip(py.astype(int), px.astype(int)):
        sl = (slice(cy - ir, cy + ir + 1), slice(cx - ir, cx + ir + 1))
        img[sl][disc] = 0.25 * img[sl][disc] + 0.75 * color
        painted[sl][disc] = True
    mid = len(t) // 2
    return M.MotifInstance(
        kind="collagen_stripe",
        bbox=_bbox_from_mask(painted, 0, 0),
        center=(int(py[mid]), int(px[mid])),
        area=int(painted.sum()),
    )


def _plant_lumen_hole(rng, img, mask, spec):
    """Near-white ellipse (luminal space)."""
    lo, hi = spec.size_range("lumen_hole")
    a = rng.uniform(lo, hi)
    b = rng.uniform(lo, hi)
    ang = rng.uniform(0, np.pi)
    margin = int(np.ceil(max(a, b))) + 1
    if 2 * margin >= spec.size:
        raise PlacementError("lumen_hole", 0)
    cy = int(rng.integers(margin, spec.size - margin))
    cx = int(rng.integers(margin, spec.size - margin))
    ext = 2 * margin + 1
    yy, xx = np.mgrid[0:ext, 0:ext]
    dy = yy - margin
    dx = xx - margin
    u = dy * np.cos(ang) + dx * np.sin(ang)
    v = -dy * np.sin(ang) + dx * np.cos(ang)
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    top, left = cy - margin, cx - margin
    color = np.array(M.COLORS["lumen_hole"], dtype=np.float64)
    img[top : top + ext, left : left + ext][inside] = color
    return M.MotifInstance(
        kind="lumen_hole",
        bbox=_bbox_from_mask(inside, top, left),
        center=(cy, cx),
        area=int(inside.sum()),
    )


_PLANTERS = {
    "collagen_stripe": _plant_collagen_stripe,
    "lumen_hole": _plant_lumen_hole,
    "tumor_blob": _plant_tumor_blob,
    "lymphocyte_dot": _plant_lymphocyte_dot,
}

# paint order: flat tissue structures first, masses, then cells on top
_PLANT_ORDER = ("collagen_stripe", "lumen_hole", "tumor_blob", "lymphocyte_dot")


def generate_scene(spec, scene_id="s000"):
    """Deterministically render one annotated scene from its spec."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    img = _paint_background(rng, spec.size)
    mask = np.zeros((spec.size, spec.size), dtype=np.uint8)
    inventory = []
    for kind in _PLANT_ORDER:
        for _ in range(int(spec.counts.get(kind, 0))):
            inventory.append(_PLANTERS[kind](rng, img, mask, spec))
    image = np.clip(np.round(img), 0, 255).astype(np.uint8)
    return AnnotatedScene(
        scene_id=scene_id, image=image, mask=mask, inventory=inventory, seed=spec.seed
    )


def generate_scenes(spec, n_scenes, start_index=0, master_seed=None):
    """Independent scenes with per-scene derived seeds (master, index)."""
    master = spec.seed if master_seed is None else master_seed
    scenes = []
    for i in range(start_index, start_index + n_scenes):
        derived = int(
            np.random.SeedSequence([master, i]).generate_state(1, np.uint32)[0]
        )
        sub = SceneSpec(
            size=spec.size, counts=spec.counts, size_ranges=spec.size_ranges, seed=derived
        )
        scenes.append(generate_scene(sub, scene_id=f"s{i:03d}"))
    return scenes


def write_scene(scene, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    save_png(out_dir / f"{scene.scene_id}_image.png", scene.image)
    save_png(out_dir / f"{scene.scene_id}_mask.png", scene.mask * 255)
    doc = {
        "scene_id": scene.scene_id,
        "seed": scene.seed,
        "inventory": [inst.to_dict() for inst in scene.inventory],
    }
    with open(out_dir / f"{scene.scene_id}_inventory.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def read_scene(dir_path, scene_id):
    image = load_png(dir_path / f"{scene_id}_image.png")
    mask = (load_png(dir_path / f"{scene_id}_mask.png") > 0).astype(np.uint8)
    with open(dir_path / f"{scene_id}_inventory.json", "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    inventory = [M.MotifInstance.from_dict(d) for d in doc["inventory"]]
    return AnnotatedScene(
        scene_id=scene_id, image=image, mask=mask, inventory=inventory, seed=doc["seed"]
    )

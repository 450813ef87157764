"""Procedural motif recipes for histology-like synthetic scenes.

Colors mimic H&E staining: purple tumor masses with a pale halo of
cytoplasmic clearing, small dark-blue lymphocyte discs, pale-pink wavy
collagen bands, and near-white lumen ellipses on a pink tissue ground.
"""

from dataclasses import dataclass

MOTIF_CLASSES = ("tumor_blob", "lymphocyte_dot", "collagen_stripe", "lumen_hole")
LESION_CLASS = "tumor_blob"  # the only class that enters the annotation mask

# per-class default size ranges, in pixels (radius / half-axis / band width)
DEFAULT_SIZE_RANGES = {
    "tumor_blob": (44, 64),
    "lymphocyte_dot": (2, 5),
    "collagen_stripe": (5, 9),
    "lumen_hole": (8, 18),
}

COLORS = {
    "background": (233, 207, 216),
    "tumor_blob": (122, 72, 152),
    "tumor_nucleus": (80, 42, 108),
    "tumor_halo": (240, 226, 236),
    "lymphocyte_dot": (48, 48, 128),
    "collagen_stripe": (246, 205, 213),
    "lumen_hole": (251, 248, 250),
}


@dataclass(frozen=True)
class MotifInstance:
    """One planted motif: class, bounding box, center, own pixel area."""

    kind: str
    bbox: tuple  # (y, x, h, w), clipped to the scene
    center: tuple  # (cy, cx)
    area: int  # pixels this instance painted (before any overdraw)

    def to_dict(self):
        return {
            "kind": self.kind,
            "bbox": list(self.bbox),
            "center": list(self.center),
            "area": self.area,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            bbox=tuple(d["bbox"]),
            center=tuple(d["center"]),
            area=int(d["area"]),
        )


def motif_in_patch(inst, y, x, patch_size):
    """Whether a motif counts as contained in the patch at top-left (y, x).

    True when the motif center lies inside the patch, or when the motif's
    bounding box overlaps the patch by at least 60% of the smaller of the
    two areas (so large masses count for patches sitting deep inside them).
    """
    cy, cx = inst.center
    if y <= cy < y + patch_size and x <= cx < x + patch_size:
        return True
    by, bx, bh, bw = inst.bbox
    iy = max(0, min(y + patch_size, by + bh) - max(y, by))
    ix = max(0, min(x + patch_size, bx + bw) - max(x, bx))
    inter = iy * ix
    smaller = min(bh * bw, patch_size * patch_size)
    return smaller > 0 and inter >= 0.6 * smaller


def patch_motif_classes(inventory, y, x, patch_size):
    """Set of motif classes contained in the patch, from inventory alone."""
    return {inst.kind for inst in inventory if motif_in_patch(inst, y, x, patch_size)}

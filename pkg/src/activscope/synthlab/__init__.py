"""Synthetic annotated scenes and the balanced patching protocol."""

from .motifs import (
    DEFAULT_SIZE_RANGES,
    LESION_CLASS,
    MOTIF_CLASSES,
    MotifInstance,
    motif_in_patch,
    patch_motif_classes,
)
from .patching import (
    DatasetManifest,
    PatchRecord,
    overlap_grid,
    recompute_overlap,
    sample_dataset,
    sample_patches,
)
from .scene import (
    AnnotatedScene,
    SceneSpec,
    generate_scene,
    generate_scenes,
    read_scene,
    write_scene,
)
from .store import read_dataset, write_dataset

__all__ = [
    "AnnotatedScene",
    "DEFAULT_SIZE_RANGES",
    "DatasetManifest",
    "LESION_CLASS",
    "MOTIF_CLASSES",
    "MotifInstance",
    "PatchRecord",
    "SceneSpec",
    "generate_scene",
    "generate_scenes",
    "motif_in_patch",
    "overlap_grid",
    "patch_motif_classes",
    "read_dataset",
    "read_scene",
    "recompute_overlap",
    "sample_dataset",
    "sample_patches",
    "write_dataset",
    "write_scene",
]

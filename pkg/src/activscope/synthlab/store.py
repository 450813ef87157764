"""Dataset persistence: PNG patches + manifest.jsonl + dataset.json."""

import hashlib
import json
from pathlib import Path

from ..errors import DatasetIOError
from ..imaging import load_png, save_png
from .patching import NEGATIVE, POSITIVE, DatasetManifest, PatchRecord

MANIFEST_NAME = "manifest.jsonl"
META_NAME = "dataset.json"
PATCH_DIR = "patches"


def _patch_filename(rec):
    return f"{rec.scene_id}_{rec.y}_{rec.x}_{rec.label}.png"


def write_dataset(manifest, out_dir):
    """Write patches, one manifest line per patch, and the dataset metadata."""
    out_dir = Path(out_dir)
    patches = out_dir / PATCH_DIR
    patches.mkdir(parents=True, exist_ok=True)
    lines = []
    for rec in manifest.records:
        save_png(patches / _patch_filename(rec), rec.pixels)
        lines.append(
            json.dumps(
                {
                    "scene_id": rec.scene_id,
                    "y": rec.y,
                    "x": rec.x,
                    "label": rec.label,
                    "overlap": rec.overlap,
                    "split": manifest.split,
                },
                sort_keys=True,
            )
        )
    manifest_bytes = ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
    (out_dir / MANIFEST_NAME).write_bytes(manifest_bytes)
    meta = {
        "tau": manifest.tau,
        "seed": manifest.seed,
        "counts": manifest.counts,
        "patch_size": manifest.patch_size,
        "grid_stride": manifest.grid_stride,
        "split": manifest.split,
        "manifest_sha256": hashlib.sha256(manifest_bytes).hexdigest(),
    }
    with open(out_dir / META_NAME, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return out_dir


def read_dataset(path):
    """Load a dataset directory back into a DatasetManifest, verifying it."""
    path = Path(path)
    meta_path = path / META_NAME
    manifest_path = path / MANIFEST_NAME
    if not meta_path.exists():
        raise DatasetIOError(f"{meta_path}: missing dataset metadata")
    if not manifest_path.exists():
        raise DatasetIOError(f"{manifest_path}: missing manifest")
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetIOError(f"{meta_path}: malformed metadata: {exc}") from exc
    for key in ("tau", "seed", "counts", "patch_size", "split", "manifest_sha256"):
        if key not in meta:
            raise DatasetIOError(f"{meta_path}: metadata missing field '{key}'")

    manifest_bytes = manifest_path.read_bytes()
    digest = hashlib.sha256(manifest_bytes).hexdigest()
    if digest != meta["manifest_sha256"]:
        raise DatasetIOError(f"{manifest_path}: checksum mismatch")

    records = []
    for line_no, line in enumerate(manifest_bytes.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetIOError(f"{manifest_path}: malformed manifest", line=line_no) from exc
        for key in ("scene_id", "y", "x", "label", "overlap", "split"):
            if key not in doc:
                raise DatasetIOError(
                    f"{manifest_path}: manifest record missing field '{key}'", line=line_no
                )
        if doc["label"] not in (POSITIVE, NEGATIVE):
            raise DatasetIOError(
                f"{manifest_path}: bad label {doc['label']!r}", line=line_no
            )
        rec = PatchRecord(
            scene_id=doc["scene_id"],
            y=int(doc["y"]),
            x=int(doc["x"]),
            label=doc["label"],
            overlap=float(doc["overlap"]),
            pixels=None,
        )
        patch_path = path / PATCH_DIR / _patch_filename(rec)
        if not patch_path.exists():
            raise DatasetIOError(f"{patch_path}: missing patch file", line=line_no)
        rec.pixels = load_png(patch_path)
        records.append(rec)

    counts = meta["counts"]
    n_pos = sum(1 for r in records if r.label == POSITIVE)
    if n_pos != counts.get(POSITIVE) or len(records) - n_pos != counts.get(NEGATIVE):
        raise DatasetIOError(f"{manifest_path}: record counts do not match metadata")
    return DatasetManifest(
        records=records,
        split=meta["split"],
        tau=meta["tau"],
        seed=meta["seed"],
        patch_size=meta["patch_size"],
        grid_stride=meta.get("grid_stride", 8),
    )

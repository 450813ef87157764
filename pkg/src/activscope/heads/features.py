"""Feature matrices tapped from the CNN, with binary persistence.

File layout ("AFM1"): magic, u32 n, u32 d, length-prefixed tap name,
d x (u32 channel, u32 flat position) provenance pairs, f32 row-major data,
u8 labels. All integers and floats little-endian.
"""

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import FeatureIOError, ShapeError

FEATURE_MAGIC = b"AFM1"


@dataclass
class FeatureMatrix:
    """n x d float32 feature rows with labels and per-column provenance."""

    X: np.ndarray
    labels: np.ndarray
    tap: str
    provenance: np.ndarray  # (d, 2) uint32: (channel, flat position within channel)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        self.provenance = np.ascontiguousarray(self.provenance, dtype=np.uint32)
        if self.X.ndim != 2:
            raise ShapeError(f"feature matrix must be 2-D, got shape {self.X.shape}")
        if len(self.labels) != self.X.shape[0]:
            raise ShapeError(
                f"labels length {len(self.labels)} != row count {self.X.shape[0]}"
            )
        if self.provenance.shape != (self.X.shape[1], 2):
            raise ShapeError(
                f"provenance shape {self.provenance.shape} != ({self.X.shape[1]}, 2)"
            )
        if not np.isfinite(self.X).all():
            raise ShapeError("feature matrix contains NaN or Inf entries")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @classmethod
    def from_arrays(cls, X, labels, tap="raw"):
        """Wrap plain arrays; provenance defaults to (column, 0)."""
        X = np.asarray(X)
        prov = np.zeros((X.shape[1], 2), dtype=np.uint32)
        prov[:, 0] = np.arange(X.shape[1])
        return cls(X=X, labels=np.asarray(labels), tap=tap, provenance=prov)

    def subset(self, columns):
        """Column-restricted copy; provenance follows the selected columns."""
        cols = np.asarray(columns, dtype=np.int64)
        if cols.size and (cols.min() < 0 or cols.max() >= self.d):
            raise ShapeError(f"column subset out of range for d={self.d}")
        return FeatureMatrix(
            X=self.X[:, cols],
            labels=self.labels,
            tap=self.tap,
            provenance=self.provenance[cols],
        )

    def split(self, mask):
        """Row-restricted copy (boolean or index mask)."""
        mask = np.asarray(mask)
        return FeatureMatrix(
            X=self.X[mask], labels=self.labels[mask], tap=self.tap, provenance=self.provenance
        )


def save_features(fm, path):
    tap_bytes = fm.tap.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<II", fm.n, fm.d))
        fh.write(struct.pack("<I", len(tap_bytes)))
        fh.write(tap_bytes)
        fh.write(fm.provenance.astype("<u4").tobytes())
        fh.write(fm.X.astype("<f4").tobytes())
        fh.write(fm.labels.astype("u1").tobytes())


def load_features(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12 or raw[:4] != FEATURE_MAGIC:
        raise FeatureIOError(f"{path}: bad magic, not a feature file")
    n, d = struct.unpack("<II", raw[4:12])
    off = 12
    if len(raw) < off + 4:
        raise FeatureIOError(f"{path}: truncated tap name")
    (tap_len,) = struct.unpack("<I", raw[off : off + 4])
    off += 4
    try:
        tap = raw[off : off + tap_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FeatureIOError(f"{path}: tap name is not valid UTF-8") from exc
    off += tap_len
    need = d * 8 + n * d * 4 + n
    if len(raw) != off + need:
        raise FeatureIOError(
            f"{path}: payload is {len(raw) - off} bytes, expected {need} for n={n} d={d}"
        )
    prov = np.frombuffer(raw[off : off + d * 8], dtype="<u4").reshape(d, 2).copy()
    off += d * 8
    X = np.frombuffer(raw[off : off + n * d * 4], dtype="<f4").reshape(n, d).copy()
    off += n * d * 4
    labels = np.frombuffer(raw[off : off + n], dtype="u1").copy()
    return FeatureMatrix(X=X, labels=labels, tap=tap, provenance=prov)

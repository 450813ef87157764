"""Structured exceptions shared across the workbench.

str(err) is always a single line so the CLI can emit machine-parsable
failures without extra formatting.
"""


class ActivscopeError(Exception):
    """Base class for all workbench errors."""

    code = "error"


class ShapeError(ActivscopeError):
    """Tensor or layer shapes do not chain consistently."""

    code = "shape"


class TapError(ActivscopeError):
    """Requested feature tap does not exist on the model."""

    code = "tap"


class PlacementError(ActivscopeError):
    """A motif could not be placed within the retry budget."""

    code = "placement"

    def __init__(self, motif_class, tried):
        self.motif_class = motif_class
        self.tried = tried
        super().__init__(f"could not place motif '{motif_class}' after {tried} attempts")


class SamplingError(ActivscopeError):
    """Not enough eligible patch coordinates for a requested count."""

    code = "sampling"

    def __init__(self, label, requested, achievable):
        self.label = label
        self.requested = requested
        self.achievable = achievable
        super().__init__(
            f"requested {requested} {label} patches, only {achievable} eligible coordinates"
        )


class DatasetIOError(ActivscopeError):
    """Dataset directory is missing files, corrupted, or malformed."""

    code = "dataset-io"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class ModelIOError(ActivscopeError):
    """Model file is truncated, corrupted, or has a bad magic/header."""

    code = "model-io"


class FeatureIOError(ActivscopeError):
    """Feature matrix file is truncated, corrupted, or inconsistent."""

    code = "feature-io"


class FitError(ActivscopeError):
    """A classifier head was given unusable training data."""

    code = "fit"


class TrainingError(ActivscopeError):
    """SGD produced a non-finite loss or was fed an empty dataset."""

    code = "training"


class GalleryError(ActivscopeError):
    """Gallery export or tag-file parsing failed."""

    code = "gallery"


class ConfigError(ActivscopeError):
    """Experiment config is missing or malformed."""

    code = "config"

    def __init__(self, message, missing_key=None):
        self.missing_key = missing_key
        if missing_key is not None:
            message = f"{message}: missing key '{missing_key}'"
        super().__init__(message)

"""Small shared image utilities: resizing and PNG round trips."""

import numpy as np
from PIL import Image


def upsample_nearest(arr, out_h, out_w):
    """Nearest-neighbor upsample of a 2-D array via block index mapping."""
    in_h, in_w = arr.shape
    rows = np.minimum((np.arange(out_h) * in_h) // out_h, in_h - 1)
    cols = np.minimum((np.arange(out_w) * in_w) // out_w, in_w - 1)
    return arr[np.ix_(rows, cols)]


def upsample_bilinear(arr, out_h, out_w):
    """Bilinear upsample of a 2-D array, corner-anchored.

    Output corners coincide with input corners (the i-th output row maps to
    input coordinate i * (in_h - 1) / (out_h - 1)), so output values are exact
    wherever that mapping lands on an integer input coordinate. A 1-wide axis
    broadcasts as constant.
    """
    in_h, in_w = arr.shape
    arr = np.asarray(arr, dtype=np.float64)
    if in_h == 1 and in_w == 1:
        return np.full((out_h, out_w), arr[0, 0])
    ys = np.linspace(0.0, in_h - 1, out_h) if in_h > 1 else np.zeros(out_h)
    xs = np.linspace(0.0, in_w - 1, out_w) if in_w > 1 else np.zeros(out_w)
    y0 = np.minimum(ys.astype(np.int64), in_h - 2) if in_h > 1 else np.zeros(out_h, np.int64)
    x0 = np.minimum(xs.astype(np.int64), in_w - 2) if in_w > 1 else np.zeros(out_w, np.int64)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    top = arr[np.ix_(y0, x0)] * (1 - fx) + arr[np.ix_(y0, x1)] * fx
    bot = arr[np.ix_(y1, x0)] * (1 - fx) + arr[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def save_png(path, pixels):
    """Write an (H, W, 3) or (H, W) uint8 array as a PNG file."""
    Image.fromarray(np.ascontiguousarray(pixels)).save(path, format="PNG")


def load_png(path):
    """Read a PNG into a uint8 array, (H, W, 3) for RGB or (H, W) for grayscale."""
    with Image.open(path) as im:
        return np.asarray(im).copy()

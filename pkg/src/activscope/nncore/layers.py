"""Batched forward/backward kernels for the CNN engine.

All spatial tensors are (n, c, h, w). Convolution is cross-correlation
(no kernel flip). Kernels are dtype-agnostic: float32 in normal runs,
float64 when a gradient check clones the model into 64-bit mode.

The convs and pools gather windows by looping over the k*k kernel offsets
and slicing, which keeps every copy contiguous along rows; on the sizes
this engine targets that beats one big strided gather by a wide margin.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError

LAYER_KINDS = ("conv", "maxpool", "avgpool", "relu", "fc", "flatten", "softmax")
WINDOWED = ("conv", "maxpool", "avgpool")


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a model schedule."""

    kind: str
    kernel: int = 0
    stride: int = 1
    padding: int = 0
    out_channels: int = 0

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ShapeError(f"unknown layer kind '{self.kind}'")
        if self.kind in WINDOWED:
            if self.kernel < 1:
                raise ShapeError(f"{self.kind}: kernel must be >= 1, got {self.kernel}")
            if self.stride < 1:
                raise ShapeError(f"{self.kind}: stride must be >= 1, got {self.stride}")
            if self.padding < 0:
                raise ShapeError(f"{self.kind}: padding must be >= 0, got {self.padding}")
        if self.kind in ("conv", "fc") and self.out_channels < 1:
            raise ShapeError(f"{self.kind}: out_channels must be >= 1, got {self.out_channels}")

    def to_dict(self):
        return {
            "kind": self.kind,
            "kernel": self.kernel,
            "stride": self.stride,
            "padding": self.padding,
            "out_channels": self.out_channels,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def out_spatial(size, kernel, stride, padding):
    """Output spatial extent: floor((in + 2*pad - k) / s) + 1, must be >= 1."""
    out = (size + 2 * padding - kernel) // stride + 1
    if out < 1 or size + 2 * padding < kernel:
        raise ShapeError(
            f"window k={kernel} s={stride} pad={padding} does not fit input extent {size}"
        )
    return out


def _as_batch(x):
    x = np.asarray(x)
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"expected (c,h,w) or (n,c,h,w) input, got shape {x.shape}")


def _pad(x, padding):
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def _offset_slices(kernel, stride, oh, ow):
    for i in range(kernel):
        for j in range(kernel):
            yield i, j, slice(i, i + stride * oh, stride), slice(j, j + stride * ow, stride)


def _im2col(x, kernel, stride, padding):
    """Columns (n, c*k*k, oh*ow) gathered offset by offset."""
    xp = _pad(x, padding)
    n, c, hp, wp = xp.shape
    oh = (hp - kernel) // stride + 1
    ow = (wp - kernel) // stride + 1
    cols = np.empty((n, c, kernel, kernel, oh, ow), dtype=x.dtype)
    for i, j, sy, sx in _offset_slices(kernel, stride, oh, ow):
        cols[:, :, i, j] = xp[:, :, sy, sx]
    return cols.reshape(n, c * kernel * kernel, oh * ow), oh, ow


def _col2im(dcols, x_shape, kernel, stride, padding, oh, ow):
    """Scatter-add column gradients back onto the (padded) input layout."""
    n, c, h, w = x_shape
    dxp = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=dcols.dtype)
    dcols = dcols.reshape(n, c, kernel, kernel, oh, ow)
    for i, j, sy, sx in _offset_slices(kernel, stride, oh, ow):
        dxp[:, :, sy, sx] += dcols[:, :, i, j]
    if padding:
        return dxp[:, :, padding : padding + h, padding : padding + w]
    return dxp


def conv2d_forward(input, kernel, stride=1, padding=0, bias=None, cols_out=None):
    """Cross-correlate a (n,c,h,w) or (c,h,w) map with (oc,c,k,k) kernels.

    cols_out, if given, is a single-item list that receives the im2col
    matrix so a training step can reuse it in the backward pass.
    """
    x, squeeze = _as_batch(input)
    w = np.asarray(kernel)
    if w.ndim != 4 or w.shape[1] != x.shape[1]:
        raise ShapeError(f"kernel shape {w.shape} does not match input shape {x.shape}")
    k = w.shape[2]
    out_spatial(x.shape[2], k, stride, padding)
    out_spatial(x.shape[3], k, stride, padding)
    cols, oh, ow = _im2col(x, k, stride, padding)
    if cols_out is not None:
        cols_out.append(cols)
    out = np.matmul(w.reshape(w.shape[0], -1), cols)  # (n, oc, oh*ow)
    if bias is not None:
        out += bias[:, None]
    out = out.reshape(x.shape[0], w.shape[0], oh, ow)
    return out[0] if squeeze else out


def conv2d_backward(dout, x, w, stride, padding, cols=None, need_dx=True):
    """Gradients of a conv layer: (dx, dw, db); dx is None when not needed."""
    n, oc, oh, ow = dout.shape
    k = w.shape[2]
    if cols is None:
        cols, _, _ = _im2col(x, k, stride, padding)
    dflat = dout.reshape(n, oc, oh * ow)
    dw = np.matmul(dflat, cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)
    db = dout.sum(axis=(0, 2, 3))
    if not need_dx:
        return None, dw, db
    dcols = np.matmul(w.reshape(oc, -1).T, dflat)  # (n, c*k*k, oh*ow)
    dx = _col2im(dcols, x.shape, k, stride, padding, oh, ow)
    return dx, dw, db


def maxpool_forward(x, kernel, stride):
    """Max pool; returns (out, argmax) where argmax indexes the k*k window.

    Ties keep the first (row-major) maximizer: later offsets only win on a
    strictly greater value.
    """
    oh = out_spatial(x.shape[2], kernel, stride, 0)
    ow = out_spatial(x.shape[3], kernel, stride, 0)
    out = None
    idx = None
    pos = 0
    for i, j, sy, sx in _offset_slices(kernel, stride, oh, ow):
        cand = x[:, :, sy, sx]
        if out is None:
            out = cand.copy()
            idx = np.zeros(out.shape, dtype=np.int16)
        else:
            better = cand > out
            np.copyto(out, cand, where=better)
            idx[better] = pos
        pos += 1
    return out, idx


def maxpool_backward(dout, idx, x_shape, kernel, stride):
    n, c, oh, ow = dout.shape
    dx = np.zeros(x_shape, dtype=dout.dtype)
    pos = 0
    for i, j, sy, sx in _offset_slices(kernel, stride, oh, ow):
        mask = idx == pos
        if mask.any():
            dx[:, :, sy, sx] += np.where(mask, dout, 0)
        pos += 1
    return dx


def avgpool_forward(x, kernel, stride):
    oh = out_spatial(x.shape[2], kernel, stride, 0)
    ow = out_spatial(x.shape[3], kernel, stride, 0)
    out = np.zeros((x.shape[0], x.shape[1], oh, ow), dtype=x.dtype)
    for i, j, sy, sx in _offset_slices(kernel, stride, oh, ow):
        out += x[:, :, sy, sx]
    out /= kernel * kernel
    return out


def avgpool_backward(dout, x_shape, kernel, stride):
    n, c, oh, ow = dout.shape
    dx = np.zeros(x_shape, dtype=dout.dtype)
    share = dout / (kernel * kernel)
    for i, j, sy, sx in _offset_slices(kernel, stride, oh, ow):
        dx[:, :, sy, sx] += share
    return dx


def relu_forward(x):
    return np.maximum(x, 0)


def relu_backward(dout, x):
    return np.where(x > 0, dout, 0)


def fc_forward(x, w, b):
    """Affine layer on (n, d_in) rows with w (d_out, d_in)."""
    if x.shape[1] != w.shape[1]:
        raise ShapeError(f"fc input dim {x.shape[1]} does not match weight dim {w.shape[1]}")
    return x @ w.T + b


def fc_backward(dout, x, w):
    dw = dout.T @ x
    db = dout.sum(axis=0)
    dx = dout @ w
    return dx, dw, db


def flatten_forward(x):
    return x.reshape(x.shape[0], -1)


def softmax_forward(z):
    """Row-wise softmax, numerically stable."""
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

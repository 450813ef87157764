"""Independent reference implementations used to cross-check the engine.

Everything here is written as plainly as possible (explicit loops over
output positions) and never calls into the code paths it validates.
"""

import numpy as np

from activscope.nncore import forward
from activscope.nncore.layers import LayerSpec
from activscope.nncore.model import LayerParams, ModelSpec


def conv2d_direct(x, w, b, stride, padding):
    """Quadruple-loop cross-correlation on one (c, h, w) input."""
    c, h, wd = x.shape
    oc, _, k, _ = w.shape
    xp = np.zeros((c, h + 2 * padding, wd + 2 * padding), dtype=np.float64)
    xp[:, padding : padding + h, padding : padding + wd] = x
    oh = (h + 2 * padding - k) // stride + 1
    ow = (wd + 2 * padding - k) // stride + 1
    out = np.zeros((oc, oh, ow), dtype=np.float64)
    for f in range(oc):
        for oy in range(oh):
            for ox in range(ow):
                acc = 0.0
                for ic in range(c):
                    window = xp[ic, oy * stride : oy * stride + k, ox * stride : ox * stride + k]
                    acc += float(np.sum(window * w[f, ic]))
                out[f, oy, ox] = acc + (b[f] if b is not None else 0.0)
    return out


def maxpool_direct(x, k, stride):
    c, h, w = x.shape
    oh = (h - k) // stride + 1
    ow = (w - k) // stride + 1
    out = np.zeros((c, oh, ow), dtype=np.float64)
    for ic in range(c):
        for oy in range(oh):
            for ox in range(ow):
                out[ic, oy, ox] = x[ic, oy * stride : oy * stride + k, ox * stride : ox * stride + k].max()
    return out


def avgpool_direct(x, k, stride):
    c, h, w = x.shape
    oh = (h - k) // stride + 1
    ow = (w - k) // stride + 1
    out = np.zeros((c, oh, ow), dtype=np.float64)
    for ic in range(c):
        for oy in range(oh):
            for ox in range(ow):
                out[ic, oy, ox] = x[ic, oy * stride : oy * stride + k, ox * stride : ox * stride + k].mean()
    return out


def fc_direct(x, w, b):
    """Row-by-row affine map using explicit python sums."""
    out = np.zeros((len(x), w.shape[0]), dtype=np.float64)
    for i, row in enumerate(x):
        for j in range(w.shape[0]):
            out[i, j] = float(np.dot(row.astype(np.float64), w[j].astype(np.float64))) + b[j]
    return out


def geometry_twin(model, max_channels=6, seed=11):
    """Clone a schedule with slim channel counts and strictly positive weights.

    Receptive-field geometry depends only on kernel/stride/padding, so the
    slim twin has the same (r, j, start) chain while being cheap to sweep.
    Positive weights and a positive input make every influence path visible:
    a large positive bump anywhere inside a neuron's true field strictly
    increases its activation, even through max pooling.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for ly in model.layers:
        if ly.kind == "conv":
            layers.append(
                LayerSpec(
                    "conv",
                    kernel=ly.kernel,
                    stride=ly.stride,
                    padding=ly.padding,
                    out_channels=min(ly.out_channels, max_channels),
                )
            )
        else:
            layers.append(ly)
    probe = ModelSpec(
        name=model.name + "_twin",
        input_size=model.input_size,
        layers=layers,
        weights=[None] * len(layers),
        seed=seed,
        assigned_layer=model.assigned_layer,
    )
    weights = []
    for shapes in probe.param_shapes():
        if shapes is None:
            weights.append(None)
            continue
        w_shape, b_shape = shapes
        weights.append(
            LayerParams(
                rng.uniform(0.05, 0.5, size=w_shape).astype(np.float32),
                np.full(b_shape, 0.1, dtype=np.float32),
            )
        )
    probe.weights = weights
    return probe


def occlusion_changed(model, layer_index, base_input, pixels, bump=1000.0, batch=64):
    """For each probed pixel, the boolean per-neuron change map at layer_index.

    Returns an array of shape (len(pixels), h_l, w_l): True where perturbing
    that input pixel (all 3 color planes, +bump) changed the neuron in any
    channel of the layer's output map.
    """
    base = forward(model, base_input[None]).outputs[layer_index][0]
    results = []
    pixels = list(pixels)
    for start in range(0, len(pixels), batch):
        chunk = pixels[start : start + batch]
        stack = np.repeat(base_input[None], len(chunk), axis=0)
        for i, (py, px) in enumerate(chunk):
            stack[i, :, py, px] += bump
        out = forward(model, stack).outputs[layer_index]
        diff = np.abs(out - base[None]) > 1e-4
        results.append(diff.any(axis=1))  # collapse channels
    return np.concatenate(results, axis=0)

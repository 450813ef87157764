"""Model schedules, forward/backward passes, pooling surgery, persistence."""

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelIOError, ShapeError, TapError
from . import layers as L

MODEL_MAGIC = b"ASM1"
TAPS = ("flat_conv", "fc1", "gap")


@dataclass
class LayerParams:
    """Weights and biases of one parameterized layer."""

    w: np.ndarray
    b: np.ndarray


@dataclass
class ModelSpec:
    """An ordered layer schedule plus its weights.

    Trained models are treated as immutable: forward passes never mutate
    weights, so one instance is safe to share across worker threads.
    """

    name: str
    input_size: tuple
    layers: list
    weights: list = field(default_factory=list)
    seed: int = 0
    assigned_layer: int = -1
    swapped: bool = False

    def __post_init__(self):
        self.input_size = tuple(self.input_size)
        self.validate()

    def validate(self):
        kinds = [ly.kind for ly in self.layers]
        if kinds.count("softmax") != 1 or kinds[-1] != "softmax":
            raise ShapeError("model must have exactly one softmax, at the end")
        self.shapes()  # raises if the schedule does not chain

    def shapes(self):
        """Per-layer output shapes, (c, h, w) before flatten and (d,) after."""
        shape = self.input_size
        out = []
        for ly in self.layers:
            if ly.kind == "conv":
                c, h, w = shape
                shape = (
                    ly.out_channels,
                    L.out_spatial(h, ly.kernel, ly.stride, ly.padding),
                    L.out_spatial(w, ly.kernel, ly.stride, ly.padding),
                )
            elif ly.kind in ("maxpool", "avgpool"):
                c, h, w = shape
                shape = (
                    c,
                    L.out_spatial(h, ly.kernel, ly.stride, 0),
                    L.out_spatial(w, ly.kernel, ly.stride, 0),
                )
            elif ly.kind == "flatten":
                shape = (int(np.prod(shape)),)
            elif ly.kind == "fc":
                if len(shape) != 1:
                    raise ShapeError("fc layer requires flattened input")
                shape = (ly.out_channels,)
            elif ly.kind in ("relu", "softmax"):
                pass
            out.append(shape)
        return out

    def param_shapes(self):
        """Shapes of (w, b) for each parameterized layer, aligned with layers."""
        shape = self.input_size
        out = []
        for ly, os in zip(self.layers, self.shapes()):
            if ly.kind == "conv":
                out.append(((ly.out_channels, shape[0], ly.kernel, ly.kernel), (ly.out_channels,)))
            elif ly.kind == "fc":
                out.append(((ly.out_channels, shape[0]), (ly.out_channels,)))
            else:
                out.append(None)
            shape = os
        return out

    def layer_index(self, kind, occurrence=0):
        hits = [i for i, ly in enumerate(self.layers) if ly.kind == kind]
        if occurrence >= len(hits):
            raise ShapeError(f"model has no {kind} layer #{occurrence}")
        return hits[occurrence]

    def last_maxpool_index(self):
        return max(i for i, ly in enumerate(self.layers) if ly.kind == "maxpool")

    def tap_index(self, tap):
        """Layer index whose output feeds the named feature tap."""
        if tap == "flat_conv":
            return self.layer_index("flatten")
        if tap == "fc1":
            i = self.layer_index("fc")
            if i + 1 < len(self.layers) and self.layers[i + 1].kind == "relu":
                return i + 1
            return i
        if tap == "gap":
            if not self.swapped:
                raise TapError("tap 'gap' only exists on pooling-swapped models")
            return self.layer_index("flatten")
        raise TapError(f"unknown tap '{tap}' (expected one of {TAPS})")

    def tap_dim(self, tap):
        return int(np.prod(self.shapes()[self.tap_index(tap)]))

    def astype(self, dtype):
        """Copy of the model with weights cast to dtype (for 64-bit check mode)."""
        clone = ModelSpec(
            name=self.name,
            input_size=self.input_size,
            layers=list(self.layers),
            weights=[
                None if p is None else LayerParams(p.w.astype(dtype), p.b.astype(dtype))
                for p in self.weights
            ],
            seed=self.seed,
            assigned_layer=self.assigned_layer,
            swapped=self.swapped,
        )
        return clone


@dataclass
class Activations:
    """Every per-layer output of one forward pass, plus the input batch."""

    x: np.ndarray
    outputs: list
    caches: list

    @property
    def probabilities(self):
        return self.outputs[-1]

    @property
    def logits(self):
        return self.outputs[-2]


def init_weights(spec_layers, input_size, seed):
    """He-style scaled uniform init, biases zero, from one seeded generator."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    probe = ModelSpec(
        name="probe",
        input_size=input_size,
        layers=list(spec_layers),
        weights=[None] * len(spec_layers),
        seed=seed,
    )
    params = []
    for shapes in probe.param_shapes():
        if shapes is None:
            params.append(None)
            continue
        w_shape, b_shape = shapes
        fan_in = int(np.prod(w_shape[1:]))
        limit = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-limit, limit, size=w_shape).astype(np.float32)
        b = np.zeros(b_shape, dtype=np.float32)
        params.append(LayerParams(w, b))
    return params


def build_model(name, input_size, layer_specs, seed, assigned_layer=-1, swapped=False):
    weights = init_weights(layer_specs, input_size, seed)
    return ModelSpec(
        name=name,
        input_size=input_size,
        layers=list(layer_specs),
        weights=weights,
        seed=seed,
        assigned_layer=assigned_layer,
        swapped=swapped,
    )


def minialex(seed=0):
    """Desk-scale preset: 3 conv blocks on 64x64 inputs, 32-channel scoring map."""
    spec = [
        L.LayerSpec("conv", kernel=5, stride=1, padding=2, out_channels=16),
        L.LayerSpec("relu"),
        L.LayerSpec("maxpool", kernel=2, stride=2),
        L.LayerSpec("conv", kernel=5, stride=1, padding=2, out_channels=32),
        L.LayerSpec("relu"),
        L.LayerSpec("maxpool", kernel=2, stride=2),
        L.LayerSpec("conv", kernel=3, stride=1, padding=1, out_channels=32),
        L.LayerSpec("relu"),
        L.LayerSpec("maxpool", kernel=2, stride=2),
        L.LayerSpec("flatten"),
        L.LayerSpec("fc", out_channels=128),
        L.LayerSpec("relu"),
        L.LayerSpec("fc", out_channels=2),
        L.LayerSpec("softmax"),
    ]
    return build_model("minialex", (3, 64, 64), spec, seed, assigned_layer=7)


def alexnet(seed=0):
    """Full-scale preset (227x227 input, 256-channel scoring map); geometry tests."""
    spec = [
        L.LayerSpec("conv", kernel=11, stride=4, padding=0, out_channels=96),
        L.LayerSpec("relu"),
        L.LayerSpec("maxpool", kernel=3, stride=2),
        L.LayerSpec("conv", kernel=5, stride=1, padding=2, out_channels=256),
        L.LayerSpec("relu"),
        L.LayerSpec("maxpool", kernel=3, stride=2),
        L.LayerSpec("conv", kernel=3, stride=1, padding=1, out_channels=384),
        L.LayerSpec("relu"),
        L.LayerSpec("conv", kernel=3, stride=1, padding=1, out_channels=384),
        L.LayerSpec("relu"),
        L.LayerSpec("conv", kernel=3, stride=1, padding=1, out_channels=256),
        L.LayerSpec("relu"),
        L.LayerSpec("maxpool", kernel=3, stride=2),
        L.LayerSpec("flatten"),
        L.LayerSpec("fc", out_channels=4096),
        L.LayerSpec("relu"),
        L.LayerSpec("fc", out_channels=4096),
        L.LayerSpec("relu"),
        L.LayerSpec("fc", out_channels=2),
        L.LayerSpec("softmax"),
    ]
    return build_model("alexnet", (3, 227, 227), spec, seed, assigned_layer=11)


PRESETS = {"minialex": minialex, "alexnet": alexnet}


def forward(model, x, keep_caches=False):
    """Run the full schedule; returns Activations with every layer output.

    x is (c, h, w) or (n, c, h, w) and must match model.input_size.
    """
    x = np.asarray(x)
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4 or tuple(x.shape[1:]) != tuple(model.input_size):
        raise ShapeError(
            f"input shape {tuple(x.shape[1:])} does not match model input {model.input_size}"
        )
    outputs = []
    caches = []
    cur = x
    for ly, params in zip(model.layers, model.weights):
        cache = None
        if ly.kind == "conv":
            sink = [] if keep_caches else None
            cur = L.conv2d_forward(cur, params.w, ly.stride, ly.padding, bias=params.b, cols_out=sink)
            if keep_caches:
                cache = sink[0]
        elif ly.kind == "maxpool":
            cur, idx = L.maxpool_forward(cur, ly.kernel, ly.stride)
            if keep_caches:
                cache = idx
        elif ly.kind == "avgpool":
            cur = L.avgpool_forward(cur, ly.kernel, ly.stride)
        elif ly.kind == "relu":
            cur = L.relu_forward(cur)
        elif ly.kind == "flatten":
            cur = L.flatten_forward(cur)
        elif ly.kind == "fc":
            cur = L.fc_forward(cur, params.w, params.b)
        elif ly.kind == "softmax":
            cur = L.softmax_forward(cur)
        outputs.append(cur)
        caches.append(cache)
    return Activations(x=x, outputs=outputs, caches=caches)


def backward(model, acts, labels):
    """Mean cross-entropy gradients for a batch; returns grads aligned with layers.

    Requires acts from forward(..., keep_caches=True). labels is an int
    vector in {0, 1}. The softmax and loss fold into dlogits = (p - y) / n.
    """
    n = acts.x.shape[0]
    probs = acts.probabilities
    dcur = probs.copy()
    dcur[np.arange(n), labels] -= 1.0
    dcur /= n
    grads = [None] * len(model.layers)
    for i in range(len(model.layers) - 2, -1, -1):
        ly = model.layers[i]
        below = acts.outputs[i - 1] if i > 0 else acts.x
        if ly.kind == "conv":
            dcur, dw, db = L.conv2d_backward(
                dcur,
                below,
                model.weights[i].w,
                ly.stride,
                ly.padding,
                cols=acts.caches[i],
                need_dx=i > 0,  # nothing below the first layer consumes dx
            )
            grads[i] = (dw, db)
            if dcur is None:
                break
        elif ly.kind == "maxpool":
            dcur = L.maxpool_backward(dcur, acts.caches[i], below.shape, ly.kernel, ly.stride)
        elif ly.kind == "avgpool":
            dcur = L.avgpool_backward(dcur, below.shape, ly.kernel, ly.stride)
        elif ly.kind == "relu":
            dcur = L.relu_backward(dcur, below)
        elif ly.kind == "flatten":
            dcur = dcur.reshape(below.shape)
        elif ly.kind == "fc":
            dcur, dw, db = L.fc_backward(dcur, below, model.weights[i].w)
            grads[i] = (dw, db)
    return grads


def batch_loss(logits, labels):
    """Mean softmax cross-entropy computed from logits via log-sum-exp."""
    logp = L.log_softmax(logits)
    return float(-logp[np.arange(len(labels)), labels].mean())


def swap_pooling(model, layer_index):
    """Replace a maxpool with a full-extent average pool (output 1x1 per channel).

    Conv weights are carried over untouched; fully connected shapes are
    re-derived for the smaller flat size and re-initialized from a seed
    derived from the model seed.
    """
    if layer_index < 0 or layer_index >= len(model.layers):
        raise ShapeError(f"layer index {layer_index} out of range")
    if model.layers[layer_index].kind != "maxpool":
        raise ShapeError(
            f"layer {layer_index} is {model.layers[layer_index].kind}, expected maxpool"
        )
    shapes = model.shapes()
    in_shape = shapes[layer_index - 1] if layer_index > 0 else model.input_size
    c, h, w = in_shape
    if h != w:
        raise ShapeError(f"full-extent average pool needs a square map, got {h}x{w}")
    new_layers = list(model.layers)
    new_layers[layer_index] = L.LayerSpec("avgpool", kernel=h, stride=1, padding=0)

    sub_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([model.seed, layer_index]))
    )
    probe = ModelSpec(
        name="probe",
        input_size=model.input_size,
        layers=new_layers,
        weights=[None] * len(new_layers),
        seed=model.seed,
    )
    new_weights = []
    for i, (old, shapes_i) in enumerate(zip(model.weights, probe.param_shapes())):
        if shapes_i is None:
            new_weights.append(None)
        elif i < layer_index:
            new_weights.append(LayerParams(old.w.copy(), old.b.copy()))
        else:
            w_shape, b_shape = shapes_i
            if old is not None and old.w.shape == w_shape:
                new_weights.append(LayerParams(old.w.copy(), old.b.copy()))
            else:
                fan_in = int(np.prod(w_shape[1:]))
                limit = np.sqrt(6.0 / fan_in)
                new_weights.append(
                    LayerParams(
                        sub_rng.uniform(-limit, limit, size=w_shape).astype(np.float32),
                        np.zeros(b_shape, dtype=np.float32),
                    )
                )
    return ModelSpec(
        name=model.name + "_gap",
        input_size=model.input_size,
        layers=new_layers,
        weights=new_weights,
        seed=model.seed,
        assigned_layer=model.assigned_layer,
        swapped=True,
    )


def save_model(model, path):
    """Persist as magic + length-prefixed JSON header + raw f32 LE weight blobs."""
    header = {
        "name": model.name,
        "input_size": list(model.input_size),
        "seed": model.seed,
        "assigned_layer": model.assigned_layer,
        "swapped": model.swapped,
        "layers": [ly.to_dict() for ly in model.layers],
        "weights": [
            None if p is None else {"w": list(p.w.shape), "b": list(p.b.shape)}
            for p in model.weights
        ],
    }
    blob = io.BytesIO()
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    blob.write(MODEL_MAGIC)
    blob.write(struct.pack("<I", len(head)))
    blob.write(head)
    for p in model.weights:
        if p is None:
            continue
        blob.write(np.ascontiguousarray(p.w, dtype="<f4").tobytes())
        blob.write(np.ascontiguousarray(p.b, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(blob.getvalue())


def load_model(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != MODEL_MAGIC:
        raise ModelIOError(f"{path}: bad magic, not a model file")
    (head_len,) = struct.unpack("<I", raw[4:8])
    if len(raw) < 8 + head_len:
        raise ModelIOError(f"{path}: truncated header")
    try:
        header = json.loads(raw[8 : 8 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelIOError(f"{path}: malformed header: {exc}") from exc
    for key in ("name", "input_size", "seed", "layers", "weights"):
        if key not in header:
            raise ModelIOError(f"{path}: header missing field '{key}'")
    layer_specs = [L.LayerSpec.from_dict(d) for d in header["layers"]]
    off = 8 + head_len
    weights = []
    for entry in header["weights"]:
        if entry is None:
            weights.append(None)
            continue
        w_shape = tuple(entry["w"])
        b_shape = tuple(entry["b"])
        nw = int(np.prod(w_shape)) * 4
        nb = int(np.prod(b_shape)) * 4
        if off + nw + nb > len(raw):
            raise ModelIOError(f"{path}: truncated weight payload")
        w = np.frombuffer(raw[off : off + nw], dtype="<f4").reshape(w_shape).copy()
        off += nw
        b = np.frombuffer(raw[off : off + nb], dtype="<f4").reshape(b_shape).copy()
        off += nb
        weights.append(LayerParams(w, b))
    if off != len(raw):
        raise ModelIOError(f"{path}: {len(raw) - off} trailing bytes after weights")
    model = ModelSpec(
        name=header["name"],
        input_size=tuple(header["input_size"]),
        layers=layer_specs,
        weights=weights,
        seed=header["seed"],
        assigned_layer=header.get("assigned_layer", -1),
        swapped=header.get("swapped", False),
    )
    for p, shapes in zip(model.weights, model.param_shapes()):
        if (p is None) != (shapes is None):
            raise ModelIOError(f"{path}: weight entries do not match layer schedule")
        if p is not None and (p.w.shape, p.b.shape) != shapes:
            raise ModelIOError(f"{path}: weight shape {p.w.shape} does not match schedule")
    return model

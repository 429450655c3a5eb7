"""Multilayer perceptron with per-layer activation tags.

Parameters live in plain numpy arrays; training paths wrap them as tape
leaves. Checkpoints are a JSON header plus a flat little-endian float64
parameter block in one file.
"""

import json
import struct

import numpy as np

from .autodiff import Var, check_finite
from .dual import Dual2

ACTIVATIONS = ("sin", "cos", "tanh", "relu", "identity")

_NP_ACT = {
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
    "identity": lambda z: z,
}

_CKPT_MAGIC = b"NETCKPT1"


def apply_activation(tag, z):
    """Apply an activation to an ndarray, a Var, or a Dual2."""
    if tag not in ACTIVATIONS:
        raise ValueError(f"unknown activation {tag!r}")
    if isinstance(z, (Var, Dual2)):
        return getattr(z, tag)()
    return _NP_ACT[tag](z)


class Layer:
    __slots__ = ("weight", "bias", "activation")

    def __init__(self, weight, bias, activation):
        self.weight = np.asarray(weight, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValueError("layer weight must be (out, in) with bias (out,)")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.activation = activation


class Net:
    """Chain of affine layers with elementwise activations."""

    def __init__(self, layers):
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.weight.shape[1] != prev.weight.shape[0]:
                raise ValueError("adjacent layer dimensions do not chain")
        self.layers = list(layers)
        self.input_dim = layers[0].weight.shape[1]
        self.output_dim = layers[-1].weight.shape[0]

    @property
    def num_params(self):
        return sum(l.weight.size + l.bias.size for l in self.layers)

    def parameter_arrays(self):
        """Flat-ordered view: [W0, b0, W1, b1, ...]."""
        out = []
        for l in self.layers:
            out.append(l.weight)
            out.append(l.bias)
        return out

    def set_parameter_arrays(self, arrays):
        if len(arrays) != 2 * len(self.layers):
            raise ValueError("parameter array count mismatch")
        for l, w, b in zip(self.layers, arrays[::2], arrays[1::2]):
            if w.shape != l.weight.shape or b.shape != l.bias.shape:
                raise ValueError("parameter shape mismatch")
            l.weight = np.asarray(w, dtype=np.float64)
            l.bias = np.asarray(b, dtype=np.float64)

    def flat_params(self):
        return np.concatenate([a.ravel() for a in self.parameter_arrays()])

    def set_flat_params(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_params,):
            raise ValueError("flat parameter length mismatch")
        arrays, pos = [], 0
        for a in self.parameter_arrays():
            arrays.append(flat[pos:pos + a.size].reshape(a.shape))
            pos += a.size
        self.set_parameter_arrays(arrays)

    def forward(self, x):
        """Evaluate one input vector."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValueError(f"expected input of shape ({self.input_dim},), got {x.shape}")
        a = x
        for l in self.layers:
            a = apply_activation(l.activation, l.weight @ a + l.bias)
        return check_finite(a, "network forward output")

    def forward_batch(self, x_rows):
        """Evaluate a (batch, input_dim) matrix of inputs row-wise."""
        a = np.asarray(x_rows, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != self.input_dim:
            raise ValueError("expected a (batch, input_dim) matrix")
        for l in self.layers:
            a = apply_activation(l.activation, a @ l.weight.T + l.bias)
        return check_finite(a, "network forward output")


def build(sizes, activations, seed):
    """Glorot-uniform weights, zero biases, deterministic under seed."""
    if len(sizes) < 2:
        raise ValueError("need at least input and output sizes")
    if any(s < 1 for s in sizes):
        raise ValueError("layer sizes must be positive")
    if len(activations) != len(sizes) - 1:
        raise ValueError(f"expected {len(sizes) - 1} activation tags, got {len(activations)}")
    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out, act in zip(sizes, sizes[1:], activations):
        bound = np.sqrt(6.0 / (n_in + n_out))
        w = rng.uniform(-bound, bound, size=(n_out, n_in))
        layers.append(Layer(w, np.zeros(n_out), act))
    return Net(layers)


def alternating_activations(n_hidden, first="sin", head="identity"):
    """sin/cos alternation across hidden layers plus an output tag."""
    pair = ("sin", "cos") if first == "sin" else ("cos", "sin")
    return [pair[i % 2] for i in range(n_hidden)] + [head]


def log_softmax_cross_entropy(logits, label):
    """Numerically stable -log softmax(logits)[label]."""
    logits = np.asarray(logits, dtype=np.float64)
    label = int(label)
    if not 0 <= label < logits.shape[-1]:
        raise ValueError(f"label {label} out of range for {logits.shape[-1]} classes")
    z = logits - logits.max()
    return float(np.log(np.exp(z).sum()) - z[label])


def params_on_tape(tape, net):
    """Wrap every parameter array as a tape leaf; order matches parameter_arrays()."""
    return [tape.leaf(a) for a in net.parameter_arrays()]


def forward_rows_on_tape(net, param_vars, x_rows):
    """Taped forward for a constant (batch, input_dim) matrix. Returns logits Var."""
    a = np.asarray(x_rows, dtype=np.float64)
    for i, l in enumerate(net.layers):
        w, b = param_vars[2 * i], param_vars[2 * i + 1]
        a = apply_activation(l.activation, a @ w.T + b)
    return a


def forward_dual(net, x_points, param_pairs=None):
    """Propagate Dual2-seeded inputs through the network.

    x_points: scalar or (n,) array of inputs (input_dim must be 1).
    param_pairs: optional [(w, b_col), ...] overriding the stored arrays,
    e.g. tape Vars during training; b_col must be shaped (out, 1).
    Returns a Dual2 whose components have shape (output_dim, n).
    """
    if net.input_dim != 1:
        raise ValueError("input derivatives need a scalar-input network")
    pts = np.atleast_1d(np.asarray(x_points, dtype=np.float64)).reshape(1, -1)
    if param_pairs is None:
        param_pairs = [(l.weight, l.bias.reshape(-1, 1)) for l in net.layers]
    a = Dual2(pts, np.ones_like(pts), np.zeros_like(pts))
    for layer, (w, b_col) in zip(net.layers, param_pairs):
        z = Dual2(w @ a.value + b_col, w @ a.d1, w @ a.d2)
        a = apply_activation(layer.activation, z)
    return a


def eval_with_input_derivs(net, x):
    """Network output and its first two derivatives w.r.t. the input.

    Accepts a scalar or an array of points; returns matching-shape triples.
    """
    x = np.asarray(x, dtype=np.float64)
    out = forward_dual(net, x)
    value, d1, d2 = (np.asarray(c)[0] for c in (out.value, out.d1, out.d2))
    for name, arr in (("output", value), ("d/dx", d1), ("d2/dx2", d2)):
        check_finite(arr, f"network {name}")
    if x.ndim == 0:
        return float(value[0]), float(d1[0]), float(d2[0])
    return value, d1, d2


def cross_entropy_on_tape(logits, labels):
    """Mean cross-entropy over a batch; logits is a (batch, classes) Var."""
    z = logits.value
    shift = z.max(axis=1, keepdims=True)  # constant: shift invariance kills its gradient
    shifted = logits - shift
    lse = shifted.exp().sum(axis=1).log()
    onehot = np.zeros_like(z)
    onehot[np.arange(z.shape[0]), labels] = 1.0
    picked = (shifted * onehot).sum(axis=1)
    return (lse - picked).mean()


def save_checkpoint(net, path, extra=None):
    """JSON header + flat '<f8' parameter block in one file."""
    header = {
        "sizes": [net.input_dim] + [l.weight.shape[0] for l in net.layers],
        "activations": [l.activation for l in net.layers],
    }
    if extra:
        header.update(extra)
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    flat = np.ascontiguousarray(net.flat_params(), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(flat.tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(_CKPT_MAGIC))
        if magic != _CKPT_MAGIC:
            raise ValueError(f"{path}: not a network checkpoint")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        payload = fh.read()
    net = build(header["sizes"], header["activations"], seed=0)
    flat = np.frombuffer(payload, dtype="<f8")
    net.set_flat_params(flat.astype(np.float64))
    return net, header

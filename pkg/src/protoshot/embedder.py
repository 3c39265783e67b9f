"""Embedding functions: identity passthrough and a small feed-forward network.

The feed-forward embedder is a plain ReLU multilayer perceptron (no
activation on the output layer) with manual forward/backward passes, sized
for feature-vector inputs rather than images.

Checkpoint format (plain text, bit-exact round trip):

    line 1: ``identity`` or ``feedforward <d0> <d1> ... <dL>``
    then, for each layer ``l`` in order, four lines:
        ``W <l> <rows> <cols>``
        row-major weight values, space-separated
        ``b <l> <n>``
        bias values, space-separated

Values are written with ``repr`` (shortest round-trip decimal for float64),
so saving and reloading reproduces every parameter bit for bit.
"""

from dataclasses import dataclass

import numpy as np

from .core import as_matrix, ensure_rng

IDENTITY = "identity"
FEEDFORWARD = "feedforward"
EMBEDDER_KINDS = (IDENTITY, FEEDFORWARD)


class IdentityEmbedder:
    """Pass features through unchanged. Has no trainable parameters."""

    kind = IDENTITY

    def transform(self, X):
        return as_matrix(X, "X")

    def parameters(self):
        return []

    def set_parameters(self, params):
        if params:
            raise ValueError("identity embedder has no parameters")


class FeedForwardEmbedder:
    """ReLU feed-forward network mapping rows of dimension d0 to dimension dL.

    Weights start uniform in [-s, s] with s = sqrt(6 / (fan_in + fan_out)),
    biases at zero, drawn from the provided generator so construction is
    deterministic per seed.
    """

    kind = FEEDFORWARD

    def __init__(self, layer_dims, rng=0):
        dims = tuple(int(d) for d in layer_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValueError(f"layer_dims needs >= 2 positive entries, got {layer_dims}")
        self.layer_dims = dims
        rng = ensure_rng(rng)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            s = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-s, s, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self):
        return len(self.weights)

    def transform(self, X):
        """Row-wise forward pass."""
        out, _ = self.forward_with_cache(X)
        return out

    def forward_with_cache(self, X):
        """Forward pass keeping the per-layer inputs and pre-activations."""
        a = as_matrix(X, "X")
        if a.shape[1] != self.layer_dims[0]:
            raise ValueError(
                f"dimension mismatch: input has dimension {a.shape[1]}, "
                f"network expects {self.layer_dims[0]}"
            )
        inputs, preacts = [], []
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(a)
            z = a @ w + b
            preacts.append(z)
            a = np.maximum(z, 0.0) if layer < self.n_layers - 1 else z
        return a, (inputs, preacts)

    def backward(self, cache, grad_output):
        """Gradients of a scalar loss w.r.t. all parameters.

        ``grad_output`` holds the loss gradient w.r.t. the network output,
        one row per input row. Returns arrays in ``parameters()`` order.
        """
        inputs, preacts = cache
        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        g = np.asarray(grad_output, dtype=float)
        for layer in range(self.n_layers - 1, -1, -1):
            if layer < self.n_layers - 1:
                g = g * (preacts[layer] > 0.0)
            grads_w[layer] = inputs[layer].T @ g
            grads_b[layer] = g.sum(axis=0)
            if layer > 0:
                g = g @ self.weights[layer].T
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.extend([gw, gb])
        return out

    def parameters(self):
        """Flat parameter list [W0, b0, W1, b1, ...] (live arrays)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def set_parameters(self, params):
        expected = 2 * self.n_layers
        if len(params) != expected:
            raise ValueError(f"expected {expected} parameter arrays, got {len(params)}")
        for layer in range(self.n_layers):
            w, b = params[2 * layer], params[2 * layer + 1]
            if w.shape != self.weights[layer].shape or b.shape != self.biases[layer].shape:
                raise ValueError(f"parameter shape mismatch at layer {layer}")
            self.weights[layer] = np.asarray(w, dtype=float)
            self.biases[layer] = np.asarray(b, dtype=float)


@dataclass(frozen=True)
class EmbedderSpec:
    """Declarative embedder description, buildable per seed."""

    kind: str = IDENTITY
    layer_dims: tuple = None

    def __post_init__(self):
        if self.kind not in EMBEDDER_KINDS:
            raise ValueError(f"unknown embedder kind {self.kind!r}, expected one of {EMBEDDER_KINDS}")
        if self.kind == FEEDFORWARD:
            if self.layer_dims is None or len(self.layer_dims) < 2:
                raise ValueError("feedforward embedder needs layer_dims with >= 2 entries")
            object.__setattr__(self, "layer_dims", tuple(int(d) for d in self.layer_dims))
        elif self.layer_dims is not None:
            raise ValueError("identity embedder takes no layer_dims")

    def build(self, rng=0):
        if self.kind == IDENTITY:
            return IdentityEmbedder()
        return FeedForwardEmbedder(self.layer_dims, rng=rng)


def save_params(embedder, path):
    """Write an embedder checkpoint in the documented plain-text format."""
    lines = []
    if embedder.kind == IDENTITY:
        lines.append(IDENTITY)
    else:
        lines.append("feedforward " + " ".join(str(d) for d in embedder.layer_dims))
        for layer, (w, b) in enumerate(zip(embedder.weights, embedder.biases)):
            lines.append(f"W {layer} {w.shape[0]} {w.shape[1]}")
            lines.append(" ".join(repr(float(v)) for v in w.ravel()))
            lines.append(f"b {layer} {b.shape[0]}")
            lines.append(" ".join(repr(float(v)) for v in b))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_params(path):
    """Rebuild an embedder from a checkpoint written by :func:`save_params`."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].strip():
        raise ValueError(f"{path}: empty checkpoint")
    header = lines[0].split()
    if header[0] == IDENTITY:
        return IdentityEmbedder()
    if header[0] != FEEDFORWARD:
        raise ValueError(f"{path}: line 1: unknown embedder kind {header[0]!r}")
    dims = [int(d) for d in header[1:]]
    emb = FeedForwardEmbedder(dims, rng=0)
    ln = 1
    for layer in range(emb.n_layers):
        for name, shape in (("W", emb.weights[layer].shape), ("b", emb.biases[layer].shape)):
            if ln + 1 >= len(lines):
                raise ValueError(f"{path}: truncated checkpoint at line {ln + 1}")
            head = lines[ln].split()
            want = [name, str(layer)] + [str(s) for s in shape]
            if head != want:
                raise ValueError(
                    f"{path}: line {ln + 1}: expected header {' '.join(want)!r}, got {lines[ln]!r}"
                )
            values = np.array([float(v) for v in lines[ln + 1].split()])
            if values.size != int(np.prod(shape)):
                raise ValueError(
                    f"{path}: line {ln + 2}: expected {int(np.prod(shape))} values, got {values.size}"
                )
            arr = values.reshape(shape)
            if name == "W":
                emb.weights[layer] = arr
            else:
                emb.biases[layer] = arr
            ln += 2
    return emb

"""A small feedforward network engine in float64 numpy.

Layers work on batches: inputs are ``(batch, features)`` arrays.  Each layer's
``forward`` returns ``(output, cache)`` and ``backward(cache, grad_out)``
returns the input gradient, storing parameter gradients on the layer.
"""

from __future__ import annotations

import io
import struct

import numpy as np

MAGIC = b"FCNN"
FORMAT_VERSION = 1
FILE_EXTENSION = ".fcnn"

NORM_FLOOR = 1e-12


class FormatError(ValueError):
    """Raised for corrupt, truncated or wrong-version model streams."""


class DegenerateNormError(ArithmeticError):
    """Energy normalisation received a (numerically) zero vector."""


class Dense:
    kind = 1

    def __init__(self, W, b):
        self.W = np.asarray(W, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ValueError(f"bad dense shapes W{self.W.shape} b{self.b.shape}")
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)

    @classmethod
    def init(cls, n_in: int, n_out: int, rng: np.random.Generator, gain: float = 2.0):
        # gain 2 is He init (layer feeds a ReLU), gain 1 otherwise
        W = rng.standard_normal((n_out, n_in)) * np.sqrt(gain / n_in)
        return cls(W, np.zeros(n_out))

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]

    def params(self):
        return [self.W, self.b]

    def grads(self):
        return [self.dW, self.db]

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_in:
            raise ValueError(f"dense layer expects {self.n_in} inputs, got {x.shape[-1]}")
        return x @ self.W.T + self.b, x

    def backward(self, x, dy):
        self.dW = dy.T @ x
        self.db = dy.sum(axis=0)
        return dy @ self.W


class ReLU:
    kind = 2

    def params(self):
        return []

    def grads(self):
        return []

    def forward(self, x):
        return np.maximum(x, 0.0), x

    def backward(self, x, dy):
        # subgradient at 0 is 0
        return dy * (x > 0)


class EnergyNormalize:
    """Scale each row to squared norm ``energy``."""

    kind = 3

    def __init__(self, energy: float):
        self.energy = float(energy)

    def params(self):
        return []

    def grads(self):
        return []

    def forward(self, z):
        norm = np.linalg.norm(z, axis=-1, keepdims=True)
        if np.any(norm < NORM_FLOOR):
            raise DegenerateNormError(f"cannot normalise vector with norm {norm.min():.3e}")
        return np.sqrt(self.energy) * z / norm, (z, norm)

    def backward(self, cache, dc):
        z, norm = cache
        u = z / norm
        # (sqrt(E)/|z|) (I - u u^T) dc
        return np.sqrt(self.energy) / norm * (dc - u * np.sum(u * dc, axis=-1, keepdims=True))


class Softmax:
    kind = 4

    def params(self):
        return []

    def grads(self):
        return []

    def forward(self, x):
        p = softmax(x)
        return p, p

    def backward(self, p, dp):
        return p * (dp - np.sum(dp * p, axis=-1, keepdims=True))


def softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, onehot):
    """Mean cross-entropy over the batch.

    Returns ``(loss, probabilities, dlogits)`` where ``dlogits`` is the
    gradient of the *mean* loss, i.e. ``(p - onehot) / batch``.
    """
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    onehot = np.atleast_2d(np.asarray(onehot, dtype=np.float64))
    z = logits - np.max(logits, axis=-1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    logp = z - logsum
    p = np.exp(logp)
    batch = logits.shape[0]
    loss = -np.sum(onehot * logp) / batch
    return loss, p, (p - onehot) / batch


class Network:
    def __init__(self, layers):
        self.layers = list(layers)
        self._check()

    def _check(self):
        width = None
        for i, layer in enumerate(self.layers):
            last = i == len(self.layers) - 1
            if isinstance(layer, EnergyNormalize) and not last:
                raise ValueError("EnergyNormalize must be the final layer")
            if isinstance(layer, Softmax) and not last:
                raise ValueError("Softmax must be the final layer")
            if isinstance(layer, Dense):
                if width is not None and layer.n_in != width:
                    raise ValueError(f"layer {i} expects {layer.n_in} inputs but receives {width}")
                width = layer.n_out

    @property
    def n_in(self) -> int:
        return next(l.n_in for l in self.layers if isinstance(l, Dense))

    @property
    def n_out(self) -> int:
        return next(l.n_out for l in reversed(self.layers) if isinstance(l, Dense))

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def grads(self):
        return [g for layer in self.layers for g in layer.grads()]

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.params())

    @property
    def body(self):
        """Layers up to the logits, i.e. without a trailing Softmax."""
        if self.layers and isinstance(self.layers[-1], Softmax):
            return self.layers[:-1]
        return self.layers

    def forward(self, x, layers=None):
        caches = []
        for layer in self.layers if layers is None else layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, caches, dy, layers=None):
        layers = self.layers if layers is None else layers
        for layer, cache in zip(reversed(layers), reversed(caches)):
            dy = layer.backward(cache, dy)
        return dy

    def logits(self, x):
        return self.forward(x, self.body)[0]

    def __call__(self, x):
        return self.forward(x)[0]


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1 - b1**self.t
        c2 = 1 - b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            # updated in place so layers holding p see the change
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def adam_step(params, grads, state: Adam | None = None, **hyper):
    """Functional wrapper: one Adam update of ``params`` in place."""
    state = state if state is not None else Adam(params, **hyper)
    state.step(grads)
    return state


def numerical_gradient(f, x, step=1e-5):
    """Central finite differences of scalar ``f`` w.r.t. array ``x`` (mutated then restored)."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        fp = f()
        x[idx] = orig - step
        fm = f()
        x[idx] = orig
        grad[idx] = (fp - fm) / (2 * step)
    return grad


def relative_error(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if denom == 0 else float(np.linalg.norm(a - b) / denom)


# -- serialisation ---------------------------------------------------------
#
# Little-endian throughout:
#   header  : b"FCNN" | u16 version | u16 layer count
#   Dense   : u8 1 | u32 rows | u32 cols | rows*cols f64 (W, row-major) | rows f64 (b)
#   ReLU    : u8 2
#   EnergyN : u8 3 | f64 energy
#   Softmax : u8 4


def serialize(net: Network) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<HH", FORMAT_VERSION, len(net.layers)))
    for layer in net.layers:
        out.write(struct.pack("<B", layer.kind))
        if isinstance(layer, Dense):
            rows, cols = layer.W.shape
            out.write(struct.pack("<II", rows, cols))
            out.write(layer.W.astype("<f8").tobytes(order="C"))
            out.write(layer.b.astype("<f8").tobytes())
        elif isinstance(layer, EnergyNormalize):
            out.write(struct.pack("<d", layer.energy))
    return out.getvalue()


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("model stream is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _read_network(reader: _Reader) -> Network:
    if reader.take(4) != MAGIC:
        raise FormatError("bad magic bytes; not a model stream")
    version, count = reader.unpack("<HH")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version}")
    layers = []
    for _ in range(count):
        (kind,) = reader.unpack("<B")
        if kind == Dense.kind:
            rows, cols = reader.unpack("<II")
            W = np.frombuffer(reader.take(8 * rows * cols), dtype="<f8").reshape(rows, cols)
            b = np.frombuffer(reader.take(8 * rows), dtype="<f8")
            layers.append(Dense(W.astype(np.float64), b.astype(np.float64)))
        elif kind == ReLU.kind:
            layers.append(ReLU())
        elif kind == EnergyNormalize.kind:
            layers.append(EnergyNormalize(reader.unpack("<d")[0]))
        elif kind == Softmax.kind:
            layers.append(Softmax())
        else:
            raise FormatError(f"unknown layer code {kind}")
    try:
        return Network(layers)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def deserialize(data: bytes, offset: int = 0, *, exact: bool = True):
    """Inverse of :func:`serialize`.

    With ``exact=False`` trailing bytes are allowed and ``(network, end_offset)``
    is returned, which is how concatenated networks are read back.
    """
    reader = _Reader(bytes(data), offset)
    net = _read_network(reader)
    if exact:
        if reader.pos != len(reader.data):
            raise FormatError("trailing bytes after model stream")
        return net
    return net, reader.pos

"""Dense feed-forward networks with hand-rolled backprop and Adam.

Both the policy and the value function are plain multi-layer perceptrons with
rectified-linear hidden activations and a linear final layer; any squashing of
the outputs (logistic heads for the policy mean/variance) happens in the
policy layer so the same network core serves both roles.  Parameters live in
plain numpy arrays so a training step is a handful of matmuls and the whole
agent stays dependency-free and bit-deterministic under a fixed seed.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

_HEADER_DTYPE = np.dtype("<i8")
_PARAM_DTYPE = np.dtype("<f8")


class Mlp:
    """Fully connected net: sizes = (in, hidden..., out), ReLU hidden layers,
    linear output.  forward() can cache activations for a later backward()."""

    def __init__(self, sizes: tuple[int, ...], rng: np.random.Generator | None = None):
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"bad layer sizes {sizes}")
        self.sizes = tuple(int(s) for s in sizes)
        self.ws: list[np.ndarray] = []
        self.bs: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes, self.sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            self.ws.append(w)
            self.bs.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.ws)

    def params(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.ws, self.bs):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x: np.ndarray, want_cache: bool = False):
        """x: (batch, in) -> (batch, out); optionally also the per-layer
        pre-activation cache needed by backward()."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        acts = [x]
        h = x
        for li in range(self.n_layers):
            z = h @ self.ws[li] + self.bs[li]
            h = np.maximum(z, 0.0) if li < self.n_layers - 1 else z
            acts.append(h)
        if want_cache:
            return h, acts
        return h

    def backward(self, acts: list[np.ndarray], dout: np.ndarray):
        """Gradients of a scalar loss wrt every parameter, given dL/doutput.

        acts is the cache from forward(want_cache=True); returns a list
        aligned with params()."""
        grads_w = [np.empty(0)] * self.n_layers
        grads_b = [np.empty(0)] * self.n_layers
        delta = np.atleast_2d(dout)
        for li in range(self.n_layers - 1, -1, -1):
            grads_w[li] = acts[li].T @ delta
            grads_b[li] = delta.sum(axis=0)
            if li > 0:
                delta = (delta @ self.ws[li].T) * (acts[li] > 0.0)
        out: list[np.ndarray] = []
        for gw, gb in zip(grads_w, grads_b):
            out.append(gw)
            out.append(gb)
        return out

    def copy(self) -> "Mlp":
        dup = Mlp(self.sizes)
        dup.ws = [w.copy() for w in self.ws]
        dup.bs = [b.copy() for b in self.bs]
        return dup


@dataclass
class Adam:
    """Adaptive-moment gradient descent with the standard defaults."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient in optimizer step")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


# ---------------------------------------------------------------------------
# Serialization: layer-count/size header + row-major weights and biases,
# little-endian 64-bit throughout.


def write_mlp(buf: io.BufferedIOBase, net: Mlp) -> None:
    header = np.array([len(net.sizes), *net.sizes], dtype=_HEADER_DTYPE)
    buf.write(header.tobytes())
    for w, b in zip(net.ws, net.bs):
        buf.write(np.ascontiguousarray(w, dtype=_PARAM_DTYPE).tobytes())
        buf.write(np.ascontiguousarray(b, dtype=_PARAM_DTYPE).tobytes())


def read_mlp(buf: io.BufferedIOBase) -> Mlp:
    (n_sizes,) = np.frombuffer(buf.read(_HEADER_DTYPE.itemsize), dtype=_HEADER_DTYPE)
    sizes = tuple(
        int(s)
        for s in np.frombuffer(buf.read(_HEADER_DTYPE.itemsize * int(n_sizes)), dtype=_HEADER_DTYPE)
    )
    net = Mlp(sizes)
    for li, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        w = np.frombuffer(buf.read(_PARAM_DTYPE.itemsize * fan_in * fan_out), dtype=_PARAM_DTYPE)
        b = np.frombuffer(buf.read(_PARAM_DTYPE.itemsize * fan_out), dtype=_PARAM_DTYPE)
        if w.size != fan_in * fan_out or b.size != fan_out:
            raise ValueError("truncated network file")
        net.ws[li] = w.reshape(fan_in, fan_out).copy()
        net.bs[li] = b.copy()
    return net

"""Small feedforward networks with hand-written backprop and Adam."""

from __future__ import annotations

from enum import Enum

import numpy as np


class Hidden(str, Enum):
    TANH = "tanh"
    RELU = "relu"


class Output(str, Enum):
    LINEAR = "linear"
    SOFTMAX = "softmax"


class ShapeError(ValueError):
    pass


class BackwardError(RuntimeError):
    """backward() called without a matching forward()."""


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


class Mlp:
    """Fully connected network ``sizes[0] -> ... -> sizes[-1]``.

    Layer ``l`` holds a ``(sizes[l+1], sizes[l])`` weight matrix. Inputs may be
    a single vector or a batch of row vectors. Gradients accumulate in
    ``grads`` (same layout as ``params``) until ``zero_grad`` or an Adam step.
    """

    def __init__(
        self,
        sizes,
        hidden: Hidden | str = Hidden.TANH,
        output: Output | str = Output.LINEAR,
        rng: np.random.Generator | None = None,
        output_gain: float = 1.0,
    ):
        self.sizes = [int(s) for s in sizes]
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ShapeError(f"bad layer sizes {sizes}")
        self.hidden = Hidden(hidden)
        self.output = Output(output)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        n_layers = len(self.sizes) - 1
        for l, (n_in, n_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if self.hidden is Hidden.RELU:
                bound = np.sqrt(6.0 / n_in)  # He-uniform
            else:
                bound = np.sqrt(6.0 / (n_in + n_out))  # Xavier-uniform
            w = rng.uniform(-bound, bound, size=(n_out, n_in))
            if l == n_layers - 1:
                w *= output_gain
            self.weights.append(w)
            self.biases.append(np.zeros(n_out))
        self.grads = [np.zeros_like(p) for p in self.params]
        self._cache: list[np.ndarray] | None = None
        self._single = False

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.hidden = self.hidden
        other.output = self.output
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        other.grads = [np.zeros_like(p) for p in other.params]
        other._cache = None
        other._single = False
        return other

    def zero_grad(self) -> None:
        for g in self.grads:
            g.fill(0.0)

    def logits(self, x) -> np.ndarray:
        """Forward pass up to the pre-activation of the last layer; caches for backward."""
        x = np.asarray(x, dtype=np.float64)
        self._single = x.ndim == 1
        h = x[None, :] if self._single else x
        if h.ndim != 2 or h.shape[1] != self.sizes[0]:
            raise ShapeError(f"input shape {x.shape} does not match first layer size {self.sizes[0]}")
        cache = [h]
        last = self.n_layers - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            if l < last:
                h = np.tanh(z) if self.hidden is Hidden.TANH else np.maximum(z, 0.0)
                cache.append(h)
            else:
                h = z
        self._cache = cache
        return h[0] if self._single else h

    def forward(self, x) -> np.ndarray:
        z = self.logits(x)
        if self.output is Output.SOFTMAX:
            return softmax(z)
        return z

    __call__ = forward

    def backward(self, grad_out, at_logits: bool = False) -> np.ndarray:
        """Accumulate parameter gradients for upstream gradient ``grad_out``.

        ``grad_out`` is taken w.r.t. the network output, or w.r.t. the last
        pre-activation when ``at_logits`` is set. Returns the input gradient.
        """
        if self._cache is None:
            raise BackwardError("backward() requires a preceding forward() on this network")
        g = np.asarray(grad_out, dtype=np.float64)
        if self._single:
            g = g[None, :]
        cache = self._cache
        if g.shape != (cache[0].shape[0], self.sizes[-1]):
            raise ShapeError(f"upstream gradient shape {g.shape} does not match output")
        if self.output is Output.SOFTMAX and not at_logits:
            # recompute output; cheap relative to the layer products
            z = cache[-1] @ self.weights[-1].T + self.biases[-1]
            p = softmax(z)
            g = p * (g - (g * p).sum(axis=1, keepdims=True))
        for l in range(self.n_layers - 1, -1, -1):
            h_in = cache[l]
            self.grads[2 * l] += g.T @ h_in
            self.grads[2 * l + 1] += g.sum(axis=0)
            g = g @ self.weights[l]
            if l > 0:
                h = cache[l]
                if self.hidden is Hidden.TANH:
                    g = g * (1.0 - h * h)
                else:
                    g = g * (h > 0.0)
        self._cache = None
        return g[0] if self._single else g

    def dumps(self) -> str:
        lines = [
            f"mlp {self.n_layers} {' '.join(map(str, self.sizes))} {self.hidden.value} {self.output.value}"
        ]
        for w, b in zip(self.weights, self.biases):
            for row in w:
                lines.append(" ".join(format(v, ".17g") for v in row))
            lines.append(" ".join(format(v, ".17g") for v in b))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Mlp":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "mlp":
            raise ValueError(f"bad checkpoint header: {lines[0]!r}")
        n_layers = int(head[1])
        sizes = [int(v) for v in head[2 : 3 + n_layers]]
        hidden, output = head[3 + n_layers], head[4 + n_layers]
        net = cls(sizes, hidden, output)
        i = 1
        for l in range(n_layers):
            n_out = sizes[l + 1]
            net.weights[l] = np.array([[float(v) for v in lines[i + r].split()] for r in range(n_out)])
            i += n_out
            net.biases[l] = np.array([float(v) for v in lines[i].split()])
            i += 1
            if net.weights[l].shape != (n_out, sizes[l]) or net.biases[l].shape != (n_out,):
                raise ValueError(f"layer {l} has wrong shape in checkpoint")
        net.grads = [np.zeros_like(p) for p in net.params]
        return net


class AdamState:
    def __init__(self, net: Mlp, lr: float = 3e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = [np.zeros_like(p) for p in net.params]
        self.v = [np.zeros_like(p) for p in net.params]


def adam_step(net: Mlp, state: AdamState, max_grad_norm: float | None = None) -> None:
    """Bias-corrected Adam update in place, then clear the gradients."""
    grads = net.grads
    if max_grad_norm is not None:
        norm = np.sqrt(sum(float((g * g).sum()) for g in grads))
        if norm > max_grad_norm:
            for g in grads:
                g *= max_grad_norm / norm
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(net.params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    net.zero_grad()
